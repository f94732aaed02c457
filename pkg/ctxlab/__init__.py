# ctxlab: Peres-Mermin contextuality verification lab
__version__ = "1.0.0"
