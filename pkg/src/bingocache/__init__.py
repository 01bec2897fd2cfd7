import importlib.metadata as im

__version__ = im.version(__package__)
