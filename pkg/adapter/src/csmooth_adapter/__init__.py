from .serve import AdapterConfig, HalfspaceModel, NearestNeighborModel, serve

__version__ = "0.1.0"
