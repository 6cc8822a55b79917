"""
sentgraph - network embeddings learned jointly from graph structure
and sentence content attached to nodes
"""

__version__ = "1.0.0"
