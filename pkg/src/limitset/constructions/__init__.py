"""Generators: gallery examples, boundary models, net, Vitali and F-sigma constructions."""

from .boundary import BoundaryModel, CantorCircle, SinglePoint, cantor_circle_ifs, full_circle

__all__ = ["BoundaryModel", "CantorCircle", "SinglePoint", "cantor_circle_ifs", "full_circle"]
