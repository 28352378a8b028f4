"""Shared pytest scaffolding.

This file also anchors the tests directory on sys.path so test modules can
import the flat helper modules (helpers.py, oracles.py) and each other's
reference implementations directly.
"""
