"""Casimir-Polder potentials near planar magnetodielectric multilayers."""
