"""Resolved models and lazily instantiated worlds."""
from .batch import BatchWorld
from .model import Evidence, FunctionDecl, Model, NumberDecl, Query
from .values import BasicRV, ObjectRef, Timestep
from .world import World, check_consistency, eval_expr, sample_world, uniform_choice
