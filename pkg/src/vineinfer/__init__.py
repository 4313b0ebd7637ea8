"""Regular-vine copula modelling with cross prediction and stress simulation."""

__version__ = "0.1.0"
