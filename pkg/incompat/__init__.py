"""Quantifying measurement incompatibility: exact SDPs, universal bounds and
the noncommutative sum-of-squares machinery behind them."""

__version__ = "0.1.0"
