"""chaoscast: forecasting benchmark for chaotic ordinary differential equations."""

__version__ = "0.1.0"
