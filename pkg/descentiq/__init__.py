"""DescentIQ - descent obstructions for equivariant torsors and gerbes on finite poset sites."""

__version__ = "0.1.0"
