"""Structure equations, an SO(6) Lax pair and the sine-Gordon surface they share."""

__version__ = "0.1.0"
