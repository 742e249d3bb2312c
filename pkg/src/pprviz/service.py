"""End-to-end pipeline: one-off preprocessing into a workspace directory,
per-query visualization, and a small threaded HTTP JSON service.

A workspace is immutable once preprocessed; queries only read it, so any
number may run concurrently.  Responses are canonical JSON bytes: the same
(workspace, supernode, seed) always serializes identically, whether produced
by the library, the CLI, or the service.  Stage timings are reported out of
band (attribute / response headers) to keep the payload deterministic.
"""

from __future__ import annotations

import hashlib
import json
import struct
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import urlparse, parse_qs

import numpy as np

from . import _kernels
from .graphio import (DirectedGraph, load_edge_list, load_graph_cache,
                      save_graph_cache)
from .hierarchy import SupergraphHierarchy, build_hierarchy
from .layout import normalize_layout, stress_majorization
from .metrics import (MetricReport, check_aesthetic_bounds, nd_upper_bound,
                      node_distribution, ulcv)
from .pdist import build_pdist_matrix
from .ppr import (DprIndex, PprParams, compute_dpr, gfp_only, gfra,
                  pi_oracle_matrix, singleton_scope, scope_view, tau_push,
                  tau_push_view)

GBP_CACHE_MAGIC = b"PVGBC1"
SINGLE_LEVEL_GUARD = 3000

ENGINES = ("taupush", "gfp-only", "gfra", "pi-oracle")


def canonical_json_bytes(obj) -> bytes:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False).encode("utf-8")


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# -- backward-state cache ------------------------------------------------------

class GbpCache:
    """Per-leaf backward push states for globally important leaves.

    Built once at preprocessing with a threshold at least as tight as any
    query will need; a lookup only succeeds when that holds, so reusing a
    state never weakens the accuracy contract.
    """

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self._targets = {}
        if self.directory.is_dir():
            for p in sorted(self.directory.glob("target_*.bin")):
                self._targets[int(p.stem.split("_")[1])] = p
        self._loaded = {}
        self._lock = threading.Lock()
        self.hits = 0

    def __len__(self):
        return len(self._targets)

    def target_ids(self):
        return sorted(self._targets)

    def lookup(self, leaf: int, r_b_required: float | None = None,
               n: int | None = None):
        path = self._targets.get(leaf)
        if path is None:
            return None
        with self._lock:
            entry = self._loaded.get(leaf)
            if entry is None:
                entry = _read_gbp_state(path)
                self._loaded[leaf] = entry
        r_b, est_ids, est_vals, _, _ = entry
        if r_b_required is not None and r_b > r_b_required:
            return None
        size = n if n is not None else (est_ids.max() + 1 if est_ids.size else 1)
        dense = np.zeros(size)
        dense[est_ids] = est_vals
        with self._lock:
            self.hits += 1
        return dense

    @staticmethod
    def build(graph: DirectedGraph, dpr: DprIndex, params: PprParams,
              directory: Path) -> "GbpCache":
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        d_max = float(graph.out_degree.max())
        r_b = params.epsilon * params.resolved_delta() / d_max
        targets = np.flatnonzero(dpr.tau > dpr.tau_star)
        deg = graph.out_degree.astype(np.float64)
        for leaf in targets:
            res = np.zeros(graph.node_count)
            res[leaf] = 1.0
            est = np.zeros(graph.node_count)
            _kernels.backward_push(graph.in_indptr, graph.in_indices, deg,
                                   params.alpha, r_b, res, est, -1,
                                   np.zeros(0))
            _write_gbp_state(directory / f"target_{int(leaf)}.bin",
                             int(leaf), r_b, params.alpha, est, res)
        return GbpCache(directory)


def _write_gbp_state(path, leaf, r_b, alpha, est, res):
    est_ids = np.flatnonzero(est)
    res_ids = np.flatnonzero(res)
    with open(path, "wb") as fh:
        fh.write(GBP_CACHE_MAGIC)
        fh.write(struct.pack("<QddQQ", leaf, r_b, alpha,
                             est_ids.size, res_ids.size))
        fh.write(est_ids.astype("<u4").tobytes())
        fh.write(est[est_ids].astype("<f8").tobytes())
        fh.write(res_ids.astype("<u4").tobytes())
        fh.write(res[res_ids].astype("<f8").tobytes())


def _read_gbp_state(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(GBP_CACHE_MAGIC))
        if magic != GBP_CACHE_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        leaf, r_b, alpha, n_est, n_res = struct.unpack("<QddQQ", fh.read(40))
        est_ids = np.frombuffer(fh.read(4 * n_est), dtype="<u4").astype(np.int64)
        est_vals = np.frombuffer(fh.read(8 * n_est), dtype="<f8").copy()
        res_ids = np.frombuffer(fh.read(4 * n_res), dtype="<u4").astype(np.int64)
        res_vals = np.frombuffer(fh.read(8 * n_res), dtype="<f8").copy()
    return r_b, est_ids, est_vals, res_ids, res_vals


# -- workspace -----------------------------------------------------------------

@dataclass
class Workspace:
    directory: Path
    manifest: dict
    graph: DirectedGraph
    hierarchy: SupergraphHierarchy
    dpr: DprIndex
    gbp_cache: GbpCache
    original_ids: list
    params: PprParams = field(init=False)

    def __post_init__(self):
        p = self.manifest["params"]
        self.params = PprParams(alpha=p["alpha"], epsilon=p["epsilon"],
                                k=p["k"], delta=p["delta"])

    @property
    def workspace_id(self) -> str:
        return self.manifest["workspace_id"]

    def default_seed(self, supernode: int) -> int:
        digest = hashlib.sha256(
            f"{self.workspace_id}:{supernode}".encode()).digest()
        return int.from_bytes(digest[:8], "big")

    def label(self, gid: int) -> str:
        if gid < self.graph.node_count:
            return str(self.original_ids[gid])
        return f"s{gid}"

    @classmethod
    def load(cls, directory) -> "Workspace":
        directory = Path(directory)
        manifest_path = directory / "manifest.json"
        if not manifest_path.is_file():
            raise FileNotFoundError(f"no manifest at {manifest_path}")
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        graph = load_graph_cache(directory / "graph.bin")
        hierarchy = SupergraphHierarchy.load(directory / "hierarchy.json")
        hierarchy.compute_super_edges(graph)
        dpr = DprIndex.load(directory / "dpr.bin")
        with open(directory / "remap.json", "r", encoding="utf-8") as fh:
            original_ids = json.load(fh)["original_ids"]
        return cls(directory=directory, manifest=manifest, graph=graph,
                   hierarchy=hierarchy, dpr=dpr,
                   gbp_cache=GbpCache(directory / "gbp_cache"),
                   original_ids=original_ids)


def preprocess(edge_list_path, k: int, out_dir, params: PprParams | None = None,
               symmetrize: bool = False):
    """Build graph cache, hierarchy, global-rank index, and backward-state
    cache under ``out_dir``.  Re-running with identical input and parameters
    is a no-op.  Returns (workspace, status) with status 'built' or
    'up-to-date'."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    edge_list_path = Path(edge_list_path)
    if not edge_list_path.is_file():
        raise FileNotFoundError(f"edge list not found: {edge_list_path}")
    out_dir = Path(out_dir)
    input_hash = _sha256_file(edge_list_path)
    if params is None:
        params = PprParams(k=k)
    elif params.k != k:
        params = PprParams(alpha=params.alpha, epsilon=params.epsilon, k=k,
                           delta=params.delta, p_f=params.p_f,
                           pi_tolerance=params.pi_tolerance)
    param_doc = {"k": k, "alpha": params.alpha, "epsilon": params.epsilon,
                 "delta": params.resolved_delta(), "symmetrize": symmetrize}
    workspace_id = hashlib.sha256(
        (input_hash + canonical_json_bytes(param_doc).decode()).encode()
    ).hexdigest()

    manifest_path = out_dir / "manifest.json"
    if manifest_path.is_file():
        with open(manifest_path, "r", encoding="utf-8") as fh:
            existing = json.load(fh)
        if existing.get("workspace_id") == workspace_id:
            return Workspace.load(out_dir), "up-to-date"

    out_dir.mkdir(parents=True, exist_ok=True)
    graph, original_ids = load_edge_list(edge_list_path, symmetrize=symmetrize)
    save_graph_cache(graph, out_dir / "graph.bin")
    with open(out_dir / "remap.json", "w", encoding="utf-8") as fh:
        json.dump({"original_ids": original_ids}, fh)
    hierarchy = build_hierarchy(graph, k)
    hierarchy.save(out_dir / "hierarchy.json")
    dpr = compute_dpr(graph, params)
    dpr.save(out_dir / "dpr.bin")
    GbpCache.build(graph, dpr, params, out_dir / "gbp_cache")

    level_sizes = [len(ch) for ch in hierarchy.level_children]
    manifest = {
        "version": 1,
        "workspace_id": workspace_id,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "input": {"path": str(edge_list_path), "sha256": input_hash},
        "params": param_doc,
        "stats": {
            "n": graph.node_count,
            "m": graph.edge_count,
            "levels": hierarchy.num_levels,
            "level_sizes": level_sizes,
            "root": hierarchy.root_id,
            "gbp_cache_targets": len(GbpCache(out_dir / "gbp_cache")),
        },
        "files": {
            "graph.bin": _sha256_file(out_dir / "graph.bin"),
            "remap.json": _sha256_file(out_dir / "remap.json"),
            "hierarchy.json": _sha256_file(out_dir / "hierarchy.json"),
            "dpr.bin": _sha256_file(out_dir / "dpr.bin"),
        },
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)
    return Workspace.load(out_dir), "built"


# -- visualization -------------------------------------------------------------

@dataclass
class VisualizationResponse:
    supernode: int
    seed: int
    children: list
    coords: np.ndarray
    super_edges: list
    metrics: MetricReport
    timing_ms: dict

    def to_dict(self) -> dict:
        return {
            "supernode": self.supernode,
            "seed": self.seed,
            "children": self.children,
            "coords": [[float(x), float(y)] for x, y in self.coords],
            "super_edges": [[int(a), int(b)] for a, b in self.super_edges],
            "metrics": self.metrics.to_json(),
        }

    def to_bytes(self) -> bytes:
        return canonical_json_bytes(self.to_dict())


def _metric_report(delta, norm_coords, slot_edges, n, m, alpha) -> MetricReport:
    # bound checks run on the raw distance matrix (the bounds' hypothesis);
    # displayed scores come from the normalized embedding
    bound_report = check_aesthetic_bounds(delta, n, m, alpha, edges=slot_edges)
    c = norm_coords.shape[0]
    nd_val = node_distribution(norm_coords) if c >= 2 else None
    ulcv_val = ulcv(norm_coords, slot_edges) if slot_edges else None
    return MetricReport(nd=nd_val, ulcv=ulcv_val,
                        nd_bound=bound_report.nd_bound,
                        ulcv_bound=bound_report.ulcv_bound,
                        nd_within=bound_report.nd_within,
                        ulcv_within=bound_report.ulcv_within)


def _estimate_matrix(ws: Workspace, scope_id: int, engine: str, seed: int,
                     workers: int = 1):
    view = scope_view(ws.graph, ws.hierarchy, scope_id)
    if engine == "taupush":
        return tau_push(ws.graph, ws.hierarchy, ws.dpr, ws.params, scope_id,
                        gbp_cache=ws.gbp_cache, scope_cache=view,
                        workers=workers)
    if engine == "gfp-only":
        return gfp_only(ws.graph, ws.hierarchy, ws.dpr, ws.params, scope_id,
                        scope_cache=view, workers=workers)
    if engine == "gfra":
        return gfra(ws.graph, ws.hierarchy, ws.params, scope_id, seed,
                    scope_cache=view)
    if engine == "pi-oracle":
        return pi_oracle_matrix(ws.graph, ws.params, view)
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def visualize(ws: Workspace, supernode: int, seed: int | None = None,
              engine: str = "taupush", workers: int = 1) -> VisualizationResponse:
    """Lay out the children of one supernode: estimate pairwise proximity,
    convert to distances, embed, normalize, and score."""
    hierarchy = ws.hierarchy
    if supernode < 0 or supernode > hierarchy.root_id:
        raise KeyError(f"unknown node id {supernode}")
    if hierarchy.is_leaf(supernode):
        raise ValueError(f"node {supernode} is a leaf; visualize its parent")
    if seed is None:
        seed = ws.default_seed(supernode)
    child_ids = hierarchy.children(supernode)
    children = [{"id": int(c), "leaf_count": int(hierarchy.leaf_count(c)),
                 "label": ws.label(c)} for c in child_ids]
    n, m = ws.graph.node_count, ws.graph.edge_count
    if len(child_ids) == 1:
        empty = MetricReport(nd=None, ulcv=None, nd_bound=nd_upper_bound(n, m),
                             ulcv_bound=None, nd_within=None, ulcv_within=None)
        return VisualizationResponse(
            supernode=int(supernode), seed=int(seed), children=children,
            coords=np.zeros((1, 2)), super_edges=[], metrics=empty,
            timing_ms={"pdist": 0.0, "layout": 0.0})

    t0 = time.perf_counter()
    result = _estimate_matrix(ws, supernode, engine, seed, workers)
    delta = build_pdist_matrix(result.matrix, n)
    t1 = time.perf_counter()
    layout = stress_majorization(delta, seed=seed)
    norm = normalize_layout(layout.coords)
    t2 = time.perf_counter()

    super_edges = hierarchy.super_edges_at(supernode)
    slot = {int(c): i for i, c in enumerate(child_ids)}
    slot_edges = [(slot[a], slot[b]) for a, b in super_edges]
    report = _metric_report(delta, norm, slot_edges, n, m, ws.params.alpha)
    return VisualizationResponse(
        supernode=int(supernode), seed=int(seed), children=children,
        coords=norm, super_edges=super_edges, metrics=report,
        timing_ms={"pdist": (t1 - t0) * 1e3, "layout": (t2 - t1) * 1e3})


def visualize_single_level(graph: DirectedGraph, seed: int | None = 42,
                           params: PprParams | None = None,
                           original_ids=None,
                           guard: int = SINGLE_LEVEL_GUARD,
                           engine: str = "taupush") -> VisualizationResponse:
    """Whole-graph layout with every node its own child (fanout = n)."""
    if seed is None:
        seed = 42
    n, m = graph.node_count, graph.edge_count
    if n > guard:
        raise ValueError(
            f"single-level mode is quadratic; n={n} exceeds guard {guard}. "
            "Preprocess a workspace and use multi-level visualization.")
    if original_ids is None:
        original_ids = list(range(n))
    children = [{"id": i, "leaf_count": 1, "label": str(original_ids[i])}
                for i in range(n)]
    if n == 1:
        empty = MetricReport(nd=None, ulcv=None, nd_bound=nd_upper_bound(n, m),
                             ulcv_bound=None, nd_within=None, ulcv_within=None)
        return VisualizationResponse(
            supernode=0, seed=int(seed), children=children,
            coords=np.zeros((1, 2)), super_edges=[], metrics=empty,
            timing_ms={"pdist": 0.0, "layout": 0.0})
    k_eff = max(n, 2)
    if params is None:
        params = PprParams(k=k_eff)
    else:
        params = PprParams(alpha=params.alpha, epsilon=params.epsilon,
                           k=k_eff, delta=params.delta,
                           pi_tolerance=params.pi_tolerance)
    view = singleton_scope(graph)
    t0 = time.perf_counter()
    if engine == "pi-oracle":
        result = pi_oracle_matrix(graph, params, view)
    else:
        dpr = compute_dpr(graph, params)
        result = tau_push_view(graph, dpr, params, view)
    delta = build_pdist_matrix(result.matrix, n)
    t1 = time.perf_counter()
    layout = stress_majorization(delta, seed=seed)
    norm = normalize_layout(layout.coords)
    t2 = time.perf_counter()
    edges = sorted({(u, int(v)) for u in range(n) for v in graph.out_neighbors(u)
                    if u != v})
    report = _metric_report(delta, norm, edges, n, m, params.alpha)
    return VisualizationResponse(
        supernode=-1, seed=int(seed), children=children, coords=norm,
        super_edges=[list(e) for e in edges], metrics=report,
        timing_ms={"pdist": (t1 - t0) * 1e3, "layout": (t2 - t1) * 1e3})


# -- HTTP service ---------------------------------------------------------------

class _ResponseCache:
    def __init__(self, capacity: int):
        self.capacity = capacity
        self._data = {}
        self._lock = threading.Lock()

    def get(self, key):
        if self.capacity <= 0:
            return None
        with self._lock:
            return self._data.get(key)

    def put(self, key, value):
        if self.capacity <= 0:
            return
        with self._lock:
            if len(self._data) >= self.capacity:
                self._data.pop(next(iter(self._data)))
            self._data[key] = value


def make_server(ws: Workspace, host: str = "127.0.0.1", port: int = 0,
                cache_size: int = 64, ui_dir=None) -> ThreadingHTTPServer:
    """Build (but do not start) the threaded HTTP server for a workspace."""
    cache = _ResponseCache(cache_size)
    ui_root = Path(ui_dir).resolve() if ui_dir else None

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send(self, status: int, body: bytes,
                  content_type: str = "application/json; charset=utf-8",
                  extra=None):
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            for key, val in (extra or {}).items():
                self.send_header(key, val)
            self.end_headers()
            self.wfile.write(body)

        def _send_json(self, status: int, obj, extra=None):
            self._send(status, canonical_json_bytes(obj), extra=extra)

        def do_GET(self):  # noqa: N802 (http.server API)
            try:
                self._route()
            except BrokenPipeError:
                pass
            except KeyError as exc:
                self._send_json(404, {"error": str(exc.args[0]) if exc.args else "not found"})
            except ValueError as exc:
                self._send_json(400, {"error": str(exc)})
            except Exception as exc:  # pragma: no cover - defensive
                self._send_json(500, {"error": f"internal error: {exc}"})

        def _route(self):
            parsed = urlparse(self.path)
            parts = [p for p in parsed.path.split("/") if p]
            if parsed.path == "/healthz":
                self._send(200, b"ok", content_type="text/plain; charset=utf-8")
                return
            if parts[:1] == ["api"]:
                self._api(parts[1:], parse_qs(parsed.query))
                return
            if ui_root is not None:
                self._static(parsed.path)
                return
            self._send_json(404, {"error": "not found"})

        def _api(self, parts, query):
            hierarchy = ws.hierarchy
            if parts == ["hierarchy"]:
                self._send_json(200, {
                    "root": hierarchy.root_id,
                    "levels": hierarchy.num_levels,
                    "k": hierarchy.k,
                    "n": ws.graph.node_count,
                    "m": ws.graph.edge_count,
                })
                return
            if len(parts) == 2 and parts[0] in ("node", "layout", "metrics"):
                try:
                    gid = int(parts[1])
                except ValueError:
                    raise ValueError(f"invalid node id {parts[1]!r}") from None
                if gid < 0 or gid > hierarchy.root_id:
                    raise KeyError(f"unknown node id {gid}")
                if parts[0] == "node":
                    parent = hierarchy.parent(gid)
                    self._send_json(200, {
                        "id": gid,
                        "level": hierarchy.level_of(gid),
                        "parent": parent if parent is None else int(parent),
                        "label": ws.label(gid),
                        "children": [
                            {"id": int(c),
                             "leaf_count": int(hierarchy.leaf_count(c)),
                             "label": ws.label(c)}
                            for c in hierarchy.children(gid)],
                    })
                    return
                seed = None
                if "seed" in query:
                    try:
                        seed = int(query["seed"][0])
                    except ValueError:
                        raise ValueError(f"invalid seed {query['seed'][0]!r}") from None
                if seed is None:
                    seed = ws.default_seed(gid)
                key = (parts[0], gid, seed)
                cached = cache.get(key)
                if cached is not None:
                    body, timing = cached
                else:
                    resp = visualize(ws, gid, seed=seed)
                    if parts[0] == "layout":
                        body = resp.to_bytes()
                    else:
                        body = canonical_json_bytes(resp.metrics.to_json())
                    timing = resp.timing_ms
                    cache.put(key, (body, timing))
                self._send(200, body, extra={
                    "X-Pdist-Ms": f"{timing['pdist']:.3f}",
                    "X-Layout-Ms": f"{timing['layout']:.3f}",
                })
                return
            raise KeyError("unknown API path /" + "/".join(["api"] + parts))

        def _static(self, path: str):
            rel = path.lstrip("/") or "index.html"
            target = (ui_root / rel).resolve()
            if not str(target).startswith(str(ui_root)) or not target.is_file():
                self._send_json(404, {"error": "not found"})
                return
            types = {".html": "text/html; charset=utf-8",
                     ".js": "text/javascript; charset=utf-8",
                     ".css": "text/css; charset=utf-8",
                     ".map": "application/json"}
            ctype = types.get(target.suffix, "application/octet-stream")
            self._send(200, target.read_bytes(), content_type=ctype)

    return ThreadingHTTPServer((host, port), Handler)


def serve(ws: Workspace, host: str = "127.0.0.1", port: int = 8080,
          cache_size: int = 64, ui_dir=None) -> None:
    """Run the HTTP service until interrupted."""
    server = make_server(ws, host, port, cache_size, ui_dir)
    bound = server.server_address
    print(f"serving workspace {ws.directory} on http://{bound[0]}:{bound[1]}",
          flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
