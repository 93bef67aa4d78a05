import copy
import logging.config
from pathlib import Path
from typing import Optional

LOGGING_CONFIG = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'standard': {
            'format': '%(asctime)s [%(levelname)s] %(name)s: %(message)s'
        },
        'custom_formatter': {
            'format': "%(asctime)s [_pid: %(process)d] [_tid: %(thread)d] [%(levelname)s] [%(name)s] %(message)s"
        },
    },
    'handlers': {
        'default': {
            'formatter': 'standard',
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stdout',  # Default is stderr
        },
        'file_handler': {
            'formatter': 'custom_formatter',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': 'chaoscast.log',
            'maxBytes': 1024 * 1024 * 1, # = 1MB
            'backupCount': 3,
        },
    },
    'loggers': {
        'chaoscast': {
            'handlers': ['default', 'file_handler'],
            'level': 'INFO',
            'propagate': False
        },
        'chaoscast.numkit': {
            'handlers': ['default', 'file_handler'],
            'level': 'WARNING',
            'propagate': False
        },
        'root': {
            'handlers': ['default'],
            'level': 'WARNING',
        },
    },
}


def configure_logging(level: str = "INFO", log_file: Optional[Path] = None) -> dict:
    """
    Applies LOGGING_CONFIG with the requested level.

    The rotating file handler is only installed when a log file is given.
    Returns the dictionary that was applied.
    """
    config = copy.deepcopy(LOGGING_CONFIG)
    if log_file is None:
        del config['handlers']['file_handler']
        for logger_config in config['loggers'].values():
            logger_config['handlers'] = [h for h in logger_config['handlers'] if h != 'file_handler']
    else:
        config['handlers']['file_handler']['filename'] = str(log_file)

    config['loggers']['chaoscast']['level'] = level.upper()
    logging.config.dictConfig(config)
    return config
