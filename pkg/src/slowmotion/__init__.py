"""Metastable interface dynamics for viscous scalar balance laws on an interval."""
