class FohorseError(Exception):
    """Base class for everything raised deliberately by fohorse"""
