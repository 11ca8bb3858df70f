"""Spin(7) structures, induced SU(3) structures on 6-dimensional submanifolds, and their torsion."""
