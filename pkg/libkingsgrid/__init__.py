"""Init Libkingsgrid"""

name = "libkingsgrid"
__version__ = "1.0.0"
