from .replication import map_indexed, standard_normals, stream

__all__ = ["map_indexed", "standard_normals", "stream"]
