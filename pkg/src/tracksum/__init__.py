"""tracksum: hierarchical summarization of event sequences for parallel
timeline rendering.

The package turns large durational event logs (one event = a track, an
enter/leave timestamp pair, and a string attribute map) into summary trees
that answer windowed queries with bounded-size slice lists, so a timeline
view stays responsive at any zoom level.
"""
from .baselines import (
    BinnedTable,
    SatResolutionError,
    attr_mask,
    m4_bars,
    m4_query,
    naive_query,
    reservoir_query,
    sat_query,
)
from .bench import Measurement, Workload, generate_workload, run_benchmark
from .hier import (
    KIND_1D,
    KIND_2D,
    KIND_AGG,
    BuildError,
    DatasetIndex,
    SummaryNode,
    build_global_tree,
    build_index,
    build_track_forest,
)
from .ingest import (
    IngestError,
    ingest_file,
    ingest_records,
    list_datasets,
    load_dataset,
    parse_schema,
    parse_trace,
    save_dataset,
)
from .model import (
    CATEGORICAL,
    NUMERIC,
    Dataset,
    Event,
    EventTable,
    ModelError,
    TimeSpan,
    TrackId,
    event_visible,
    spans_overlap,
)
from .query import (
    NodeCache,
    QueryError,
    QueryHandle,
    QueryResult,
    RangeQuery,
    SummarySlice,
    UnsupportedPredicateError,
    conditional_query,
    handle_from_index,
    pixel_window_span,
    range_query,
)
from .raster import (
    RasterGrid,
    export_png,
    grids_equal,
    occupied_columns,
    rasterize_events,
    rasterize_slices,
    ssim,
)
from .store import (
    NodeStore,
    StoreBusyError,
    StoreCapacityError,
    StoreError,
    decode_key,
    encode_key,
    store_dir,
    write_index_store,
)
from .synth import DISTRIBUTIONS, SynthSpec, default_extent, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "BinnedTable", "SatResolutionError", "attr_mask", "m4_bars", "m4_query",
    "naive_query", "reservoir_query", "sat_query",
    "Measurement", "Workload", "generate_workload", "run_benchmark",
    "KIND_1D", "KIND_2D", "KIND_AGG", "BuildError", "DatasetIndex",
    "SummaryNode", "build_global_tree", "build_index", "build_track_forest",
    "IngestError", "ingest_file", "ingest_records", "list_datasets",
    "load_dataset", "parse_schema", "parse_trace", "save_dataset",
    "CATEGORICAL", "NUMERIC", "Dataset", "Event", "EventTable", "ModelError",
    "TimeSpan", "TrackId", "event_visible", "spans_overlap",
    "NodeCache", "QueryError", "QueryHandle", "QueryResult", "RangeQuery",
    "SummarySlice", "UnsupportedPredicateError", "conditional_query",
    "handle_from_index", "pixel_window_span", "range_query",
    "RasterGrid", "export_png", "grids_equal", "occupied_columns",
    "rasterize_events", "rasterize_slices", "ssim",
    "NodeStore", "StoreBusyError", "StoreCapacityError", "StoreError",
    "decode_key", "encode_key", "store_dir", "write_index_store",
    "DISTRIBUTIONS", "SynthSpec", "default_extent", "generate_synthetic",
    "__version__",
]
