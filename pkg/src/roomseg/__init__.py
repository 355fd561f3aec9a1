"""Room segmentation of occupancy and sketch maps from their free-space layout."""
from .evaluation import ConfusionCounts, EvalReport, confusion, evaluate, match_regions, mcc, precision_recall
from .free_space import compute_fsi, compute_fsi_naive, distance_transform, group_regions
from .map_io import GridMap, LabelImage, load_ground_truth, load_labels, load_map, write_segmentation
from .merging import Params, is_door, merge_similar, remove_ripples, remove_wall_artifacts
from .pipeline import run_stages, segment, sweep
from .refine import straighten_boundaries
from .region_graph import Edge, GraphError, Region, RegionGraph

__version__ = "0.1.0"
