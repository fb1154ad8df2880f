"""Long-time asymptotics of the complex mKdV equation with step-like data."""

__version__ = "0.1.0"
