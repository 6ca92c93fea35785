"""Workbench for strongly indivisible graphs: stage constructions run to a finite horizon."""

__version__ = "0.1.0"
