# -*- coding: utf-8 -*-
# Copyright 2026 agclust contributors

from .augment import sample_view
from .common import (
    AttributedGraph, AugmentationSpec, ClusteringError, ModelWidths,
    TrainConfig,
)
from .graph import generate_sbm, load_graph, load_graph_json, save_graph
from .metrics import evaluate, kmeans
from .model import dump_checkpoint, load_checkpoint, predict_oos
from .trainer import Trainer, run_repeats, train

__title__ = 'agclust'
__version__ = "26.10.0"  # setuptools parses this. Retain formatting.
__author__ = "agclust contributors"
__license__ = 'Apache License 2.0'

__all__ = [
    'AttributedGraph', 'AugmentationSpec', 'ModelWidths', 'TrainConfig',
    'ClusteringError',
    'load_graph', 'load_graph_json', 'save_graph', 'generate_sbm',
    'sample_view', 'Trainer', 'train', 'run_repeats',
    'predict_oos', 'dump_checkpoint', 'load_checkpoint',
    'evaluate', 'kmeans',
]
