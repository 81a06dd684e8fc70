# -*- coding: utf-8 -*-
# label-diffusion - classifiers from noisy labels via conditional label diffusion
# Copyright (C) 2026 label-diffusion contributors
#
# This file is part of label-diffusion.
#
# label-diffusion is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# label-diffusion is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with label-diffusion.  If not, see <https://www.gnu.org/licenses/>.


"""The label-diffusion command line.

Results are printed as key=value lines on stdout, logs go to stdout as well and
problems to stderr. Every command is deterministic given its flags.
"""

import argparse
import sys
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from labeldiffusion.configs.training import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_CHUNK_SIZE,
    DEFAULT_EPOCHS,
    DEFAULT_LR,
    DEFAULT_NEIGHBORS,
    DEFAULT_STEPS,
    DEFAULT_VOTES,
    FqMode,
    InferConfig,
    InferMode,
    Metric,
    TargetMode,
    TrainConfig,
)
from labeldiffusion.datastore.blobs import BlobSpec, blob_posterior, synth_blobs
from labeldiffusion.datastore.formats import (
    read_features,
    read_labels,
    write_features,
    write_labels,
)
from labeldiffusion.datastore.manifest import (
    read_manifest,
    write_manifest,
    write_provenance,
)
from labeldiffusion.diffusion.checkpoint import load_checkpoint, save_checkpoint
from labeldiffusion.diffusion.sampler import mle_infer, vote_distribution
from labeldiffusion.diffusion.trainer import Trainer
from labeldiffusion.evalharness import (
    accuracy,
    append_metrics,
    knn_classifier,
    metrics_line,
    noise_rate,
    select_k,
)
from labeldiffusion.exceptions import DimensionError, Error, OverwriteInputError
from labeldiffusion.logger import log_info, logger, update_verbosity
from labeldiffusion.noisegen import (
    PosteriorTable,
    TransitionMatrix,
    asymmetric_matrix,
    calibrate_noise_factor,
    compose_noise,
    uniform_matrix,
)
from labeldiffusion.paths import MANIFEST_SUFFIX, is_same_file, sidecar_path
from labeldiffusion.retrieval import build_index
from labeldiffusion.utils import make_rng

NOISE_KINDS = ("uniform", "asymmetric", "pmd")


def _refuse_overwrite(inputs: Iterable[Optional[str]], outputs: Iterable[Optional[str]]):
    for output in outputs:
        if output is None:
            continue
        for source in inputs:
            if source is not None and is_same_file(source, output):
                raise OverwriteInputError(output)


def _emit(**metrics):
    """Print a result line."""
    print(metrics_line(**metrics), flush=True)


def _noise_arg(value: str) -> Tuple[str, float]:
    try:
        kind, rate = value.split("=", 1)
        rate = float(rate)
    except ValueError:
        raise argparse.ArgumentTypeError(f'Expected kind=rate, got "{value}"')

    if kind not in NOISE_KINDS:
        raise argparse.ArgumentTypeError(
            f'Unknown noise kind "{kind}", choose from {", ".join(NOISE_KINDS)}'
        )

    return kind, rate


def _int_list(value: str) -> List[int]:
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'Expected comma separated integers, got "{value}"')


def _optional_features(path: Optional[str], rows: int, what: str) -> Optional[np.ndarray]:
    if path is None:
        return None

    values = read_features(path)
    if values.shape[0] != rows:
        raise DimensionError(f'{what} rows in "{path}"', rows, values.shape[0])

    return values


def cmd_synth(args: argparse.Namespace):
    """Generate gaussian blobs, their clean labels and a manifest."""
    _refuse_overwrite([args.features_out], [args.labels_out])
    spec = BlobSpec.on_circle(
        n_classes=args.classes,
        per_class=args.per_class,
        radius=args.radius,
        sigma=args.sigma,
        dim=args.dim,
        seed=args.seed,
    )
    features, labels = synth_blobs(spec)
    write_features(args.features_out, features)
    write_labels(args.labels_out, labels, spec.n_classes)
    write_manifest(args.features_out, spec, labels=args.labels_out)
    _emit(points=spec.size, classes=spec.n_classes, dim=spec.dim)


def _posterior_table(args: argparse.Namespace, n: int, n_classes: int) -> PosteriorTable:
    if args.posterior is not None:
        eta = read_features(args.posterior)
    elif args.features is not None:
        spec = read_manifest(sidecar_path(args.features, MANIFEST_SUFFIX))
        eta = blob_posterior(spec, read_features(args.features))
    else:
        raise DimensionError("pmd noise", "--posterior or --features", None)

    if eta.shape != (n, n_classes):
        raise DimensionError("posterior table", (n, n_classes), eta.shape)

    # stored as 32 bit floats, renormalize before the simplex check
    return PosteriorTable(eta=eta / eta.sum(axis=1, keepdims=True))


def cmd_noisify(args: argparse.Namespace):
    """Corrupt labels with pmd, uniform or asymmetric noise, in that order."""
    _refuse_overwrite(
        [args.labels, args.features, args.posterior],
        [args.out, args.reference_out],
    )
    clean, n_classes = read_labels(args.labels)
    rng = make_rng(args.seed)

    table = None
    matrices: List[TransitionMatrix] = []
    provenance: Dict[str, object] = dict(source=args.labels, seed=args.seed)
    for position, (kind, rate) in enumerate(args.noise or []):
        if kind == "pmd":
            if table is not None:
                raise DimensionError("pmd noise", "at most once", "twice")
            table = _posterior_table(args, clean.shape[0], n_classes)
            c = calibrate_noise_factor(table, rate)
            table = table.with_noise_factor(c)
            provenance["pmd"] = rate
            provenance["pmd_noise_factor"] = repr(c)
        elif kind == "uniform":
            matrices.append(uniform_matrix(n_classes, rate))
            provenance[f"step{position}"] = f"uniform={rate}"
        else:
            mapping = args.mapping
            matrices.append(asymmetric_matrix(n_classes, rate, mapping))
            provenance[f"step{position}"] = f"asymmetric={rate}"
            if mapping is not None:
                provenance[f"step{position}_mapping"] = ",".join(map(str, mapping))

    reference, noisy = compose_noise(clean, rng, table, matrices)
    write_labels(args.out, noisy, n_classes)
    if args.reference_out is not None:
        write_labels(args.reference_out, reference, n_classes)

    rate = noise_rate(noisy, reference)
    provenance["realized_noise_rate"] = rate
    write_provenance(args.out, **provenance)
    _emit(noise_rate=rate)


def cmd_train(args: argparse.Namespace):
    """Fit the denoiser on retrieval augmented targets and store a checkpoint."""
    inputs = [args.features, args.labels, args.clean_labels, args.raw, args.fq]
    _refuse_overwrite(inputs, [args.checkpoint_out, args.candidates, args.metrics_out])

    features = read_features(args.features)
    labels, n_classes = read_labels(args.labels)
    if labels.shape[0] != features.shape[0]:
        raise DimensionError("label count", features.shape[0], labels.shape[0])

    clean = None
    if args.clean_labels is not None:
        clean, _ = read_labels(args.clean_labels)

    config = TrainConfig(
        T=args.timesteps,
        S=args.steps,
        k=args.k,
        metric=args.metric,
        beta_start=args.beta_start,
        beta_end=args.beta_end,
        hidden=args.hidden,
        time_embed_dim=args.time_embed_dim,
        n_blocks=args.blocks,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        warmup_epochs=args.warmup_epochs,
        seed=args.seed,
        target_mode=args.target_mode,
        f_q_mode=FqMode.PROVIDED if args.fq is not None else FqMode.ZERO,
        threads=args.threads,
    )
    n = features.shape[0]
    result = Trainer(
        config,
        features,
        labels,
        n_classes,
        raw=_optional_features(args.raw, n, "raw input"),
        f_q=_optional_features(args.fq, n, "f_q(x)"),
        clean_labels=clean,
        candidates_path=args.candidates,
    ).run()
    save_checkpoint(args.checkpoint_out, result.model, result.optimizer, result.diffusion)

    metrics = dict(final_loss=result.final_loss, epochs=config.epochs, k=config.k)
    if result.candidate_clean is not None:
        metrics["candidate_clean_fraction"] = result.candidate_clean
    _emit(**metrics)
    if args.metrics_out is not None:
        append_metrics(args.metrics_out, command="train", **metrics)


def cmd_infer(args: argparse.Namespace):
    """Classify features with a trained checkpoint."""
    inputs = [args.checkpoint, args.features, args.raw, args.fq]
    _refuse_overwrite(inputs, [args.out, args.scores_out])

    checkpoint = load_checkpoint(args.checkpoint)
    config = InferConfig(
        S=args.steps if args.steps is not None else checkpoint.diffusion.S,
        mode=args.mode,
        n_samples=args.samples,
        seed=args.seed,
        threads=args.threads,
        chunk_size=args.chunk_size,
    )
    diffusion = checkpoint.diffusion.with_steps(config.S)
    features = read_features(args.features)
    n = features.shape[0]
    raw = _optional_features(args.raw, n, "raw input")
    f_q = _optional_features(args.fq, n, "f_q(x)")

    if config.mode == InferMode.MLE:
        classes, scores = mle_infer(
            diffusion,
            checkpoint.model,
            features,
            raw,
            f_q,
            chunk_size=config.chunk_size,
            threads=config.threads,
        )
    else:
        scores = vote_distribution(
            diffusion,
            checkpoint.model,
            features,
            raw,
            f_q,
            n_samples=config.n_samples,
            rng=make_rng(config.seed),
            chunk_size=config.chunk_size,
            threads=config.threads,
        )
        classes = np.argmax(scores, axis=1)

    write_labels(args.out, classes, diffusion.n_classes)
    if args.scores_out is not None:
        write_features(args.scores_out, scores)

    _emit(points=n, mode=InferMode(config.mode).value, steps=config.S)


def cmd_eval(args: argparse.Namespace):
    """Compare predicted labels with the truth."""
    _refuse_overwrite([args.pred, args.truth], [args.metrics_out])
    pred, _ = read_labels(args.pred)
    truth, _ = read_labels(args.truth)
    metrics = dict(accuracy=accuracy(pred, truth), noise_rate=noise_rate(pred, truth))
    _emit(**metrics)
    if args.metrics_out is not None:
        append_metrics(args.metrics_out, command="eval", pred=args.pred, **metrics)


def cmd_knn(args: argparse.Namespace):
    """The kNN classifier baseline in the feature space."""
    _refuse_overwrite([args.features, args.labels, args.queries, args.truth], [args.out])
    features = read_features(args.features)
    labels, n_classes = read_labels(args.labels)
    index = build_index(features, labels, args.metric)
    queries = read_features(args.queries)

    truth = None
    if args.truth is not None:
        truth, _ = read_labels(args.truth)

    k = args.k
    if args.select_k is not None:
        if truth is None:
            raise DimensionError("--select-k", "--truth labels of the queries", None)
        k, scores = select_k(index, queries, truth, n_classes, args.select_k, args.threads)
        for candidate, score in scores.items():
            logger.info("k=%d accuracy=%.6g", candidate, score)

    prediction = knn_classifier(index, queries, k, n_classes, args.threads)
    if args.out is not None:
        write_labels(args.out, prediction, n_classes)

    metrics: Dict[str, object] = dict(k=k)
    if truth is not None:
        metrics["accuracy"] = accuracy(prediction, truth)
    _emit(**metrics)


def _add_train_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--features", required=True, help="LRAF file of f_p(x)")
    parser.add_argument("--labels", required=True, help="LRAL file of noisy labels")
    parser.add_argument("--checkpoint-out", required=True)
    parser.add_argument("--clean-labels", help="only used to report target quality")
    parser.add_argument("--raw", help="LRAF file of raw inputs for the encoder branch")
    parser.add_argument("--fq", help="LRAF file of f_q(x), zero if omitted")
    parser.add_argument("--candidates", help="LRAC cache, read if it exists, else written")
    parser.add_argument("--metrics-out", help="append the results to this csv table")
    parser.add_argument("--timesteps", "--T", type=int, default=1000, dest="timesteps")
    parser.add_argument("--steps", "--S", type=int, default=DEFAULT_STEPS, dest="steps")
    parser.add_argument("--k", type=int, default=DEFAULT_NEIGHBORS)
    parser.add_argument("--metric", choices=[m.value for m in Metric], default="euclidean")
    parser.add_argument("--beta-start", type=float, default=1e-4)
    parser.add_argument("--beta-end", type=float, default=0.02)
    parser.add_argument("--hidden", type=int, default=128)
    parser.add_argument("--time-embed-dim", type=int, default=128)
    parser.add_argument("--blocks", type=int, default=3)
    parser.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS)
    parser.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    parser.add_argument("--lr", type=float, default=DEFAULT_LR)
    parser.add_argument("--warmup-epochs", type=int, default=None)
    parser.add_argument(
        "--target-mode",
        choices=[mode.value for mode in TargetMode],
        default=TargetMode.SAMPLE.value,
    )


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="label-diffusion",
        description="Learn classifiers from noisy labels with conditional label diffusion",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed of all randomness")
    parser.add_argument("--threads", type=int, default=1, help="worker thread limit")
    parser.add_argument("-d", "--debug", action="store_true", help="debug output")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="generate gaussian blobs")
    synth.add_argument("--classes", type=int, default=4)
    synth.add_argument("--per-class", type=int, default=500)
    synth.add_argument("--radius", type=float, default=4.0)
    synth.add_argument("--sigma", type=float, default=1.0)
    synth.add_argument("--dim", type=int, default=2)
    synth.add_argument("--features-out", required=True)
    synth.add_argument("--labels-out", required=True)
    synth.set_defaults(func=cmd_synth)

    noisify = commands.add_parser("noisify", help="corrupt labels")
    noisify.add_argument("--labels", required=True)
    noisify.add_argument("--out", required=True)
    noisify.add_argument(
        "--noise",
        type=_noise_arg,
        action="append",
        metavar="KIND=RATE",
        help="uniform, asymmetric or pmd, repeatable, pmd is applied first",
    )
    noisify.add_argument("--mapping", type=_int_list, help="asymmetric targets, i -> i+1 if omitted")
    noisify.add_argument("--features", help="blob features with a manifest, for pmd")
    noisify.add_argument("--posterior", help="LRAF file of eta(x) rows, for pmd")
    noisify.add_argument("--reference-out", help="labels that the noise rate refers to")
    noisify.set_defaults(func=cmd_noisify)

    train = commands.add_parser("train", help="train the denoiser")
    _add_train_flags(train)
    train.set_defaults(func=cmd_train)

    infer = commands.add_parser("infer", help="classify with a checkpoint")
    infer.add_argument("--checkpoint", required=True)
    infer.add_argument("--features", required=True)
    infer.add_argument("--out", required=True)
    infer.add_argument("--raw")
    infer.add_argument("--fq")
    infer.add_argument("--mode", choices=[mode.value for mode in InferMode], default="mle")
    infer.add_argument("--samples", type=int, default=DEFAULT_VOTES)
    infer.add_argument("--steps", "--S", type=int, default=None, dest="steps")
    infer.add_argument("--chunk-size", type=int, default=DEFAULT_CHUNK_SIZE)
    infer.add_argument("--scores-out", help="LRAF file of denoised labels or vote shares")
    infer.set_defaults(func=cmd_infer)

    evaluate = commands.add_parser("eval", help="accuracy of predictions")
    evaluate.add_argument("--pred", required=True)
    evaluate.add_argument("--truth", required=True)
    evaluate.add_argument("--metrics-out")
    evaluate.set_defaults(func=cmd_eval)

    knn = commands.add_parser("knn", help="kNN classifier baseline")
    knn.add_argument("--features", required=True)
    knn.add_argument("--labels", required=True)
    knn.add_argument("--queries", required=True)
    knn.add_argument("--truth")
    knn.add_argument("--out")
    knn.add_argument("--k", type=int, default=DEFAULT_NEIGHBORS)
    knn.add_argument("--metric", choices=[m.value for m in Metric], default="euclidean")
    knn.add_argument("--select-k", type=_int_list, metavar="K,K,...")
    knn.set_defaults(func=cmd_knn)

    return parser


def _one_line(error: BaseException) -> str:
    return " ".join(str(error).split())


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run a command, return the exit status."""
    args = make_parser().parse_args(argv)
    update_verbosity(args.debug)
    if args.debug:
        log_info()

    try:
        args.func(args)
    except (Error, ValueError, OSError) as error:
        # pydantic.ValidationError is a ValueError
        logger.error("%s", _one_line(error))
        return 1

    return 0


if __name__ == "__main__":
    sys.exit(main())
