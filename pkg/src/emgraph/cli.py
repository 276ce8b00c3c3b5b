"""Command-line interface composing the pipeline into reproducible runs.

Every artifact embeds the fully resolved run configuration and seed, so a
second run with the same configuration reproduces it byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .checkpoint import save_checkpoint
from .errors import EmgError, ParameterError
from .evaluation import (
    EvalConfig,
    cross_validate,
    render_report,
    report_from_json,
    report_to_json,
)
from .features.extract import ALL_FEATURE_NAMES, MODEL_FEATURE_NAMES
from .features.scaling import apply_standardizer, fit_standardizer
from .features.spectral import power_spectrum
from .gcn import TrainConfig
from .gcn import embed as gcn_embed
from .gcn import train as gcn_train
from .graph import FeatureGraph, graph_stats, knn_graph, normalize_adjacency
from .pipeline import WindowingConfig, build_feature_table, feature_table_to_csv
from .signal_io import SegmentId, load_dataset, segment
from .svm import train_svm
from .synth import CohortSpec, generate_cohort

_SEGMENT_CHOICES = {str(int(s)): s for s in SegmentId}


def _add_option(parser, spec, suppress: bool):
    flags, kwargs = spec
    kwargs = dict(kwargs)
    if suppress:
        kwargs["default"] = argparse.SUPPRESS
    parser.add_argument(*flags, **kwargs)


_WINDOW_OPTS = [
    (["--window-s"], dict(type=float, default=1.0, help="window length in seconds")),
    (["--overlap"], dict(type=float, default=0.5, help="window overlap fraction in [0,1)")),
    (["--segments"], dict(type=str, default="1,3,5", help="comma-separated segment ids to analyze")),
]
_GRAPH_OPTS = [
    (["--k"], dict(type=int, default=10, help="neighbors per node for the KNN graph")),
]
_MODEL_OPTS = [
    (["--pipeline"], dict(choices=["svm", "gcn", "gcn-svm"], default="gcn-svm", help="classifier pipeline")),
    (["--epochs"], dict(type=int, default=50, help="GCN training epochs")),
    (["--svm-c"], dict(type=float, default=1.0, help="SVM box constraint C")),
    (["--svm-kernel"], dict(choices=["rbf", "linear"], default="rbf", help="SVM kernel")),
]

_COMMANDS: dict[str, dict] = {
    "synth": {
        "help": "generate a synthetic cohort dataset",
        "opts": [
            (["--out"], dict(required=True, help="output dataset directory")),
            (["--seed"], dict(type=int, default=0, help="cohort seed")),
            (["--n-pd"], dict(type=int, default=5, help="number of PD subjects")),
            (["--n-healthy"], dict(type=int, default=5, help="number of healthy subjects")),
            (["--fs"], dict(type=float, default=1000.0, help="sampling rate in Hz")),
        ],
    },
    "extract": {
        "help": "extract per-window features to CSV",
        "opts": [
            (["--data"], dict(required=True, help="dataset root directory")),
            (["--out"], dict(required=True, help="output feature CSV path")),
            (["--features"], dict(choices=["model", "all"], default="all", help="feature set to compute")),
        ]
        + _WINDOW_OPTS,
    },
    "graph-stats": {
        "help": "print KNN graph statistics for a dataset",
        "opts": [
            (["--data"], dict(required=True, help="dataset root directory")),
            (["--json"], dict(action="store_true", default=False, help="emit JSON instead of text")),
        ]
        + _WINDOW_OPTS
        + _GRAPH_OPTS,
    },
    "train": {
        "help": "train on the full dataset and write a checkpoint",
        "opts": [
            (["--data"], dict(required=True, help="dataset root directory")),
            (["--out"], dict(required=True, help="checkpoint output path")),
            (["--seed"], dict(type=int, default=0, help="training seed")),
        ]
        + _WINDOW_OPTS
        + _GRAPH_OPTS
        + _MODEL_OPTS,
    },
    "evaluate": {
        "help": "cross-validate a pipeline and write text + JSON reports",
        "opts": [
            (["--data"], dict(required=True, help="dataset root directory")),
            (["--out-prefix"], dict(default=None, help="write <prefix>.txt and <prefix>.json")),
            (["--seed"], dict(type=int, default=0, help="evaluation seed")),
            (["--folds"], dict(type=int, default=5, help="number of stratified folds")),
            (["--inductive"], dict(action="store_true", default=False, help="rebuild the graph per fold from training nodes")),
            (["--group-by-subject"], dict(action="store_true", default=False, help="stratify whole subjects instead of windows")),
        ]
        + _WINDOW_OPTS
        + _GRAPH_OPTS
        + _MODEL_OPTS,
    },
    "report": {
        "help": "re-render a JSON evaluation report",
        "opts": [
            (["--in"], dict(dest="in_path", required=True, help="JSON report path")),
            (["--format"], dict(default="text", help="output format: text or json")),
        ],
    },
    "plot": {
        "help": "emit per-recording signal and spectrum figures (SVG)",
        "opts": [
            (["--data"], dict(required=True, help="dataset root directory")),
            (["--out"], dict(required=True, help="output directory for figures")),
        ],
    },
}


def build_parser(suppress: bool = False) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emgraph",
        description="sEMG feature extraction and graph-based PD/healthy classification",
    )
    parser.add_argument("--version", action="version", version=f"emgraph {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, spec in _COMMANDS.items():
        cmd = sub.add_parser(name, help=spec["help"])
        cmd.add_argument("--config", default=None, help="key=value config file; flags win")
        for opt in spec["opts"]:
            _add_option(cmd, opt, suppress)
    return parser


def _load_config_file(path: str) -> dict[str, str]:
    values = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(f"config line {line_no} is not key=value: {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve_args(argv) -> argparse.Namespace:
    """Merge precedence: command-line flags > config file > built-in defaults."""
    args = build_parser().parse_args(argv)
    if not args.config:
        return args
    explicit = vars(build_parser(suppress=True).parse_args(argv))
    defaults = vars(args)
    for key, raw in _load_config_file(args.config).items():
        if key not in defaults:
            raise ParameterError(f"unknown config key {key!r}")
        if key in explicit:
            continue
        current = defaults[key]
        if isinstance(current, bool):
            setattr(args, key, raw.lower() in ("1", "true", "yes"))
        elif isinstance(current, int):
            setattr(args, key, int(raw))
        elif isinstance(current, float):
            setattr(args, key, float(raw))
        else:
            setattr(args, key, raw)
    return args


def _provenance(args: argparse.Namespace) -> dict:
    resolved = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("config",)
    }
    return {"version": __version__, "config": resolved}


def _parse_segments(text: str) -> tuple[SegmentId, ...]:
    segments = []
    for token in text.split(","):
        token = token.strip()
        if token not in _SEGMENT_CHOICES:
            raise ParameterError(f"unknown segment id {token!r} (want 1..5)")
        segments.append(_SEGMENT_CHOICES[token])
    return tuple(segments)


def _windowing(args) -> WindowingConfig:
    return WindowingConfig(
        window_s=args.window_s,
        overlap=args.overlap,
        segments=_parse_segments(args.segments),
    )


def _cmd_synth(args) -> int:
    spec = CohortSpec(n_pd=args.n_pd, n_healthy=args.n_healthy, fs=args.fs, seed=args.seed)
    out = Path(args.out)
    manifest = generate_cohort(spec, out)
    manifest["provenance"] = _provenance(args)
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(manifest['subjects'])} recordings under {out}")
    return 0


def _cmd_extract(args) -> int:
    recordings = load_dataset(args.data)
    names = ALL_FEATURE_NAMES if args.features == "all" else MODEL_FEATURE_NAMES
    table = build_feature_table(recordings, _windowing(args), feature_names=names)
    prov = _provenance(args)
    text = feature_table_to_csv(
        table, provenance={"version": prov["version"], **prov["config"]}
    )
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote {table.n_rows} feature rows to {args.out}")
    return 0


def _build_graph(args):
    recordings = load_dataset(args.data)
    table = build_feature_table(recordings, _windowing(args))
    scaler = fit_standardizer(table.matrix, list(table.feature_names))
    x = apply_standardizer(scaler, table.matrix)
    edges = knn_graph(x, k=args.k)
    return table, FeatureGraph(x=x, edges=edges, labels=table.labels)


def _cmd_graph_stats(args) -> int:
    _, graph = _build_graph(args)
    stats = graph_stats(graph)
    payload = {
        "n_nodes": graph.n_nodes,
        "n_edges": int(graph.edges.shape[0]),
        "average_degree": stats.average_degree,
        "average_degree_centrality": stats.average_degree_centrality,
        "average_clustering_coefficient": stats.average_clustering_coefficient,
        "provenance": _provenance(args),
    }
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(f"nodes                    {graph.n_nodes}")
        print(f"edges                    {graph.edges.shape[0]}")
        print(f"average degree           {stats.average_degree:.6f}")
        print(f"average centrality       {stats.average_degree_centrality:.6f}")
        print(f"average clustering       {stats.average_clustering_coefficient:.6f}")
    return 0


def _cmd_train(args) -> int:
    table, graph = _build_graph(args)
    prov = _provenance(args)
    gcn_params = None
    svm_model = None
    if args.pipeline in ("gcn", "gcn-svm"):
        masked = graph.with_masks(np.arange(graph.n_nodes), [])
        a_hat = normalize_adjacency(masked)
        cfg = TrainConfig(epochs=args.epochs, seed=args.seed)
        gcn_params = gcn_train(masked, a_hat, cfg).params
        features_for_svm = gcn_embed(a_hat, masked.x, gcn_params)
    else:
        features_for_svm = graph.x
    if args.pipeline in ("svm", "gcn-svm"):
        signed = np.where(graph.labels == 1, 1.0, -1.0)
        svm_model = train_svm(
            features_for_svm, signed, kernel=args.svm_kernel, C=args.svm_c, seed=args.seed
        )
    save_checkpoint(
        args.out,
        gcn_params=gcn_params,
        svm_model=svm_model,
        config=prov["config"],
        seed=args.seed,
        provenance=prov,
    )
    print(f"wrote checkpoint {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    recordings = load_dataset(args.data)
    table = build_feature_table(recordings, _windowing(args))
    cfg = EvalConfig(
        k_folds=args.folds,
        seed=args.seed,
        knn_k=args.k,
        svm_kernel=args.svm_kernel,
        svm_c=args.svm_c,
        gcn_epochs=args.epochs,
        inductive=args.inductive,
        group_by_subject=args.group_by_subject,
    )
    report = cross_validate(
        table.matrix,
        table.labels,
        args.pipeline,
        cfg,
        groups=np.array(table.subjects),
    )
    prov = _provenance(args)
    report.provenance.update(prov["config"])
    report.provenance["version"] = prov["version"]
    text = render_report(report, "text")
    print(text, end="")
    if args.out_prefix:
        prefix = Path(args.out_prefix)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        prefix.with_suffix(".txt").write_text(text, encoding="utf-8")
        prefix.with_suffix(".json").write_text(
            report_to_json(report) + "\n", encoding="utf-8"
        )
    return 0


def _cmd_report(args) -> int:
    report = report_from_json(Path(args.in_path).read_text(encoding="utf-8"))
    print(render_report(report, args.format), end="")
    return 0


def _cmd_plot(args) -> int:
    import matplotlib

    matplotlib.use("svg")
    matplotlib.rcParams["svg.hashsalt"] = "emgraph"
    import matplotlib.pyplot as plt

    recordings = load_dataset(args.data)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    prov = json.dumps(_provenance(args), sort_keys=True)
    shades = ["#dddddd", "#bbccee", "#dddddd", "#bbccee", "#dddddd"]
    for rec in recordings:
        fig, (ax_sig, ax_spec) = plt.subplots(2, 1, figsize=(10, 6))
        ax_sig.plot(rec.t, rec.v, linewidth=0.4, color="#223355")
        if rec.stage_marks:
            bounds = [mt for mt, _ in rec.stage_marks] + [float(rec.t[-1])]
            for i, (mt, seg) in enumerate(rec.stage_marks):
                ax_sig.axvspan(mt, bounds[i + 1], color=shades[i % len(shades)], alpha=0.35)
                ax_sig.text(
                    (mt + bounds[i + 1]) / 2, 0.95, f"S{int(seg)}",
                    transform=ax_sig.get_xaxis_transform(), ha="center", fontsize=8,
                )
        ax_sig.set_xlabel("time [s]")
        ax_sig.set_ylabel("amplitude [AU]")
        ax_sig.set_title(f"{rec.subject_id} ({rec.hand.value})")
        spectrum = power_spectrum(rec.v, rec.sampling_rate_hz)
        ax_spec.semilogy(spectrum.freqs[1:], np.maximum(spectrum.power[1:], 1e-12), linewidth=0.6)
        ax_spec.set_xlim(0, 30)
        ax_spec.set_xlabel("frequency [Hz]")
        ax_spec.set_ylabel("power [AU^2]")
        fig.tight_layout()
        name = f"{rec.subject_id}_{rec.hand.value}.svg"
        fig.savefig(out_dir / name, metadata={"Date": None, "Description": prov})
        plt.close(fig)
    print(f"wrote {len(recordings)} figures under {out_dir}")
    return 0


_HANDLERS = {
    "synth": _cmd_synth,
    "extract": _cmd_extract,
    "graph-stats": _cmd_graph_stats,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "report": _cmd_report,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    try:
        args = _resolve_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except EmgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return _HANDLERS[args.command](args)
    except EmgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
