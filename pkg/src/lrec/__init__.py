"""Linear λ-calculus with numbers and an iterator-style recursor:
terms, typing, reduction, evaluators, an abstract machine, encodings,
a minimisation variant, and a PCF frontend that compiles into it."""

__version__ = "0.1.0"
