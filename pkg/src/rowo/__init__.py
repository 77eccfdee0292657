"""A typechecker and interpreter for a row-typed System F-omega with
first-class labels and label-generic record and variant combinators."""

__version__ = "0.1.0"
