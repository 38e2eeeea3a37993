"""Rotation-minimizing frames, rectifying-type curves and curve classification."""
