# -*- coding: utf-8 -*-
"""cli.py

Command line front end. Every sub-command is a thin wrapper over the library; errors leave as one JSON line on stderr
and the exit code of the exception class (1 usage or configuration, 2 data failure, 3 internal invariant).

    python -m ffg_body synth --n 200 --seed 7 --out corpus
    python -m ffg_body build-model --corpus corpus --k 4 --out model.json
    python -m ffg_body measure --corpus corpus --out measurements.csv
    python -m ffg_body fit-map --corpus corpus --model model.json --measurements measurements.csv --out map.json
    python -m ffg_body reconstruct --measurements measurements.csv --model model.json --map map.json --out rebuilt
    python -m ffg_body edit --mesh corpus/body_0000.obj --model model.json --map map.json \
        --slot waist --delta 30 --out edited.obj
    python -m ffg_body render --mesh corpus/body_0000.obj --view frontal --out front.pgm
    python -m ffg_body train-reg --corpus corpus --out regressor.json
    python -m ffg_body eval --corpus corpus --regressor regressor.json --out mae.csv
    python -m ffg_body roundtrip --corpus corpus --model model.json --map map.json --out roundtrip.csv

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import argparse
import concurrent.futures
import csv
import json
import logging
import pathlib
import sys
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .config import PipelineConfig, TailorConfig
from .corpus import SEGMENTATION, Corpus, write_corpus
from .errors import BodyModelError, ConfigError, PartialFailureError
from .generator import sample_population
from .measurements import SLOTS, MeasurementVector, parse_deltas, read_csv, write_csv
from .mesh_io import load_obj, save_obj
from .regressor import evaluate_model, load_regressor, predict_from_features, save_regressor, train_regressor, \
    write_evaluation
from .segmentation import load_segmentation
from .semantic_map import build_mapping_dataset, edit_body, fit_linear_map, load_map, reconstruct_body, roundtrip, \
    save_map
from .shape_model import explained_variance, fit_body_model, load_model, save_model
from .silhouette import body_features, render_silhouette, save_pgm
from .section import save_png, save_svg
from .tailor import measure_body, measure_body_detailed

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Argument parser reporting usage errors as ConfigError instead of exiting."""
    def error(self, message: str) -> None:
        raise ConfigError('{}: {}'.format(self.prog, message))


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError('must be at least 1, got {}'.format(value))
    return value


def _settings(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig.load(args.config)
    overrides = {key: getattr(args, key) for key in ('jobs', 'seed') if getattr(args, key, None) is not None}
    return config.model_copy(update=overrides)


def _tailor(settings: PipelineConfig, args: argparse.Namespace) -> TailorConfig:
    path = getattr(args, 'tailor_config', None) or settings.tailor_config
    return TailorConfig.load(path)


def _parallel(function: Callable, items: Sequence, jobs: int) -> List:
    """Maps a picklable function over items, in item order."""
    if jobs <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(function, items))


def _measure_task(task: Tuple[str, str, TailorConfig]) -> Tuple[Optional[List[float]], Optional[str]]:
    mesh_path, seg_path, config = task
    try:
        m = measure_body(load_obj(mesh_path), load_segmentation(seg_path), config)
        return m.values.tolist(), None
    except BodyModelError as e:
        return None, str(e)


def _features_task(mesh_path: str) -> List[float]:
    return body_features(load_obj(mesh_path)).tolist()


def _require(value: Optional[str], flag: str) -> str:
    if not value:
        raise ConfigError('{} is required (on the command line or in --config)'.format(flag))
    return value


def _corpus(settings: PipelineConfig, args: argparse.Namespace) -> Corpus:
    return Corpus.load(_require(getattr(args, 'corpus', None) or settings.corpus_dir, '--corpus'))


def _measure_corpus(corpus: Corpus, config: TailorConfig, jobs: int) -> \
        Tuple[List[str], List[MeasurementVector], dict]:
    seg_path = str(corpus.root / SEGMENTATION)
    tasks = [(str(corpus.mesh_path(name)), seg_path, config) for name in corpus.names]
    names, vectors, failures = [], [], {}
    for name, (values, error) in zip(corpus.names, _parallel(_measure_task, tasks, jobs)):
        if error is not None:
            failures[name] = error
            logger.warning('%s: %s', name, error)
            continue
        names.append(name)
        vectors.append(MeasurementVector(values))
    return names, vectors, failures


def _targets(corpus: Corpus, config: TailorConfig, jobs: int) -> Tuple[List[str], List[MeasurementVector]]:
    """Ground-truth measurements when the corpus carries them, tailor measurements otherwise."""
    if corpus.has_truth:
        return list(corpus.names), [corpus.truth(name) for name in corpus.names]
    names, vectors, failures = _measure_corpus(corpus, config, jobs)
    if failures:
        logger.warning('%d subjects could not be measured and are left out', len(failures))
    return names, vectors


def _write_failures(path: pathlib.Path, failures: dict) -> None:
    with open(str(path), 'w') as f:
        json.dump(failures, f, indent=2, sort_keys=True)


def cmd_synth(args: argparse.Namespace, settings: PipelineConfig) -> int:
    if not args.spread >= 0.0:
        raise ConfigError('--spread must be non-negative, got {}'.format(args.spread))
    config = _tailor(settings, args)
    bodies = sample_population(settings.seed, args.n, args.spread, config=config)
    meshes = [mesh for mesh, _, _ in bodies]
    truth = [m for _, _, m in bodies]
    write_corpus(args.out, meshes, bodies[0][1], truth)
    logger.info('Synthesized %d bodies into %s', len(bodies), args.out)
    return 0


def cmd_build_model(args: argparse.Namespace, settings: PipelineConfig) -> int:
    corpus = _corpus(settings, args)
    k = args.k if args.k is not None else settings.k
    model = fit_body_model(list(corpus.meshes()), corpus.segmentation, k, progress=args.verbose)
    out = pathlib.Path(_require(args.out or settings.model_path, '--out'))
    save_model(model, out)
    with open(str(out.with_name(out.stem + '_variance.csv')), 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['part'] + ['component_{}'.format(i + 1) for i in range(k)] + ['cumulative'])
        for label in model.labels:
            ratios = explained_variance(model.parts[label])
            writer.writerow([label.value] + ['{:.6f}'.format(r) for r in ratios] + ['{:.6f}'.format(ratios.sum())])
    logger.info('Wrote model with %d parts and %d coefficients to %s', len(model.parts), model.coefficient_count(),
                out)
    return 0


def _write_sections(directory: pathlib.Path, parts: dict) -> None:
    """Writes the chosen cross-section of every part as SVG and PNG, in part coordinates."""
    directory.mkdir(parents=True, exist_ok=True)
    for label, measured in parts.items():
        save_svg(measured.section, directory / '{}.svg'.format(label.value))
        save_png(measured.section, directory / '{}.png'.format(label.value))
    logger.info('Wrote %d cross-sections to %s', len(parts), directory)


def cmd_measure(args: argparse.Namespace, settings: PipelineConfig) -> int:
    config = _tailor(settings, args)
    if args.mesh:
        seg = load_segmentation(_require(args.seg, '--seg'))
        m, parts = measure_body_detailed(load_obj(args.mesh), seg, config)
        write_csv(args.out, [m])
        if args.sections:
            _write_sections(pathlib.Path(args.sections), parts)
        return 0
    if args.sections:
        raise ConfigError('--sections needs a single --mesh')
    corpus = _corpus(settings, args)
    names, vectors, failures = _measure_corpus(corpus, config, settings.jobs)
    write_csv(args.out, vectors, names)
    if failures:
        _write_failures(pathlib.Path(args.out).with_suffix('.failures.json'), failures)
        raise PartialFailureError('{} of {} subjects failed'.format(len(failures), len(corpus)), failures)
    return 0


def cmd_fit_map(args: argparse.Namespace, settings: PipelineConfig) -> int:
    corpus = _corpus(settings, args)
    model = load_model(_require(args.model or settings.model_path, '--model'), corpus.segmentation)
    measured = None
    if args.measurements:
        names, vectors = read_csv(args.measurements)
        by_name = dict(zip(names, vectors))
        measured = [by_name.get(name) for name in corpus.names]
    bodies = [(mesh, corpus.segmentation) for mesh in corpus.meshes()]
    dataset = build_mapping_dataset(bodies, model, _tailor(settings, args), measured, progress=args.verbose)
    ridge = args.ridge if args.ridge is not None else settings.map_ridge
    save_map(fit_linear_map(dataset, ridge), _require(args.out or settings.map_path, '--out'))
    if dataset.skipped:
        raise PartialFailureError('{} bodies could not be measured'.format(dataset.skipped))
    return 0


def cmd_reconstruct(args: argparse.Namespace, settings: PipelineConfig) -> int:
    model = load_model(_require(args.model or settings.model_path, '--model'))
    linear_map = load_map(_require(args.map or settings.map_path, '--map'))
    names, vectors = read_csv(args.measurements)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failures = {}
    for i, (name, m) in enumerate(zip(names, vectors)):
        name = name or 'row_{:04d}'.format(i)
        try:
            save_obj(reconstruct_body(m, linear_map, model, settings.epsilon), out / '{}.obj'.format(name))
        except BodyModelError as e:
            failures[name] = str(e)
    if failures:
        _write_failures(out / 'failures.json', failures)
        raise PartialFailureError('{} of {} reconstructions failed'.format(len(failures), len(vectors)), failures)
    return 0


def _slot_name(name: str) -> str:
    if name in SLOTS:
        return name
    for suffix in ('_circumference', '_length'):
        if name + suffix in SLOTS:
            return name + suffix
    raise ConfigError('unknown measurement slot {!r}'.format(name))


def cmd_edit(args: argparse.Namespace, settings: PipelineConfig) -> int:
    model = load_model(_require(args.model or settings.model_path, '--model'))
    linear_map = load_map(_require(args.map or settings.map_path, '--map'))
    deltas = parse_deltas(args.deltas) if args.deltas else {}
    if args.slot is not None:
        if args.delta is None:
            raise ConfigError('--slot needs --delta')
        deltas[_slot_name(args.slot)] = args.delta
    if not deltas:
        raise ConfigError('nothing to edit: give --slot/--delta or --deltas')
    config = _tailor(settings, args)
    m = measure_body(load_obj(args.mesh), model.segmentation, config)
    result = edit_body(m, deltas, linear_map, model, config, remeasure=not args.no_remeasure,
                       epsilon=settings.epsilon)
    out = pathlib.Path(args.out)
    save_obj(result.mesh, out)
    with open(str(out.with_suffix('.json')), 'w') as f:
        json.dump(result.to_dict(), f, indent=2)
    return 0


def cmd_render(args: argparse.Namespace, settings: PipelineConfig) -> int:
    save_pgm(render_silhouette(load_obj(args.mesh), args.view, args.height), args.out)
    return 0


def _split(order: Sequence[str], names: List[str], vectors: List[MeasurementVector], fraction: float) -> \
        Tuple[Tuple[List[str], List[MeasurementVector]], Tuple[List[str], List[MeasurementVector]]]:
    """Splits subjects by their position in the corpus order, so a subject left out by the measurement does not move
    others across the boundary. Returns (train names, train vectors), (test names, test vectors)."""
    if not 0.0 < fraction < 1.0:
        raise ConfigError('--split must lie in (0, 1), got {}'.format(fraction))
    training = set(order[:int(round(len(order) * fraction))])
    train, test = ([], []), ([], [])
    for name, m in zip(names, vectors):
        half = train if name in training else test
        half[0].append(name)
        half[1].append(m)
    return train, test


def _feature_pairs(corpus: Corpus, names: List[str], vectors: List[MeasurementVector], jobs: int) -> \
        List[Tuple[np.ndarray, MeasurementVector]]:
    features = _parallel(_features_task, [str(corpus.mesh_path(name)) for name in names], jobs)
    return [(np.array(f), m) for f, m in zip(features, vectors)]


def cmd_train_reg(args: argparse.Namespace, settings: PipelineConfig) -> int:
    corpus = _corpus(settings, args)
    names, vectors = _targets(corpus, _tailor(settings, args), settings.jobs)
    (train_names, train_vectors), _ = _split(corpus.names, names, vectors, args.split)
    ridge = args.ridge if args.ridge is not None else settings.regressor_ridge
    model = train_regressor(_feature_pairs(corpus, train_names, train_vectors, settings.jobs), ridge)
    save_regressor(model, args.out)
    logger.info('Trained regressor on %d subjects', len(train_names))
    return 0


def cmd_eval(args: argparse.Namespace, settings: PipelineConfig) -> int:
    corpus = _corpus(settings, args)
    names, vectors = _targets(corpus, _tailor(settings, args), settings.jobs)
    (_, train_vectors), (test_names, test_vectors) = _split(corpus.names, names, vectors, args.split)
    model = load_regressor(args.regressor)
    test = _feature_pairs(corpus, test_names, test_vectors, settings.jobs)
    evaluation = evaluate_model(model, test, train_vectors)
    write_evaluation(evaluation, args.out)
    logger.info('Mean absolute error over all slots: %.2f mm', evaluation.mean())
    return 0


def cmd_roundtrip(args: argparse.Namespace, settings: PipelineConfig) -> int:
    corpus = _corpus(settings, args)
    model = load_model(_require(args.model or settings.model_path, '--model'), corpus.segmentation)
    linear_map = load_map(_require(args.map or settings.map_path, '--map'))
    predict = None
    if args.regressor:
        regressor = load_regressor(args.regressor)

        def predict(mesh):
            return predict_from_features(regressor, body_features(mesh))
    bodies = [(mesh, corpus.segmentation) for mesh in corpus.meshes()]
    report = roundtrip(bodies, linear_map, model, _tailor(settings, args), predict=predict, progress=args.verbose)
    with open(str(args.out), 'w', newline='') as f:
        csv.writer(f, lineterminator='\n').writerows(report.rows())
    if report.failures:
        raise PartialFailureError('{} bodies failed the round trip'.format(report.failures))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='ffg_body', description='Part-based body shape modelling toolkit.')
    parser.add_argument('--config', help='pipeline configuration JSON')
    parser.add_argument('--jobs', type=_positive_int, help='worker processes for corpus commands')
    parser.add_argument('--seed', type=int, help='random seed')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true', help='debug logging and progress bars')
    verbosity.add_argument('--quiet', action='store_true', help='warnings and errors only')
    commands = parser.add_subparsers(dest='command', parser_class=_Parser)
    commands.required = True

    def command(name: str, handler: Callable, help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text)
        sub.set_defaults(handler=handler)
        sub.add_argument('--tailor-config', dest='tailor_config', help='tailor configuration JSON')
        return sub

    sub = command('synth', cmd_synth, 'generate a synthetic humanoid corpus')
    sub.add_argument('--n', type=_positive_int, default=200)
    sub.add_argument('--spread', type=float, default=0.05)
    sub.add_argument('--out', required=True)

    sub = command('build-model', cmd_build_model, 'fit the part-based shape model')
    sub.add_argument('--corpus')
    sub.add_argument('--k', type=_positive_int)
    sub.add_argument('--out')

    sub = command('measure', cmd_measure, 'measure one body or a corpus')
    sub.add_argument('--mesh')
    sub.add_argument('--seg')
    sub.add_argument('--corpus')
    sub.add_argument('--sections', help='directory for SVG and PNG images of the chosen cross-sections')
    sub.add_argument('--out', required=True)

    sub = command('fit-map', cmd_fit_map, 'fit the measurement to shape map')
    sub.add_argument('--corpus')
    sub.add_argument('--model')
    sub.add_argument('--measurements', help='measurements CSV of the corpus, measured here when absent')
    sub.add_argument('--ridge', type=float)
    sub.add_argument('--out')

    sub = command('reconstruct', cmd_reconstruct, 'build bodies from a measurements CSV')
    sub.add_argument('--measurements', required=True)
    sub.add_argument('--model')
    sub.add_argument('--map')
    sub.add_argument('--out', required=True)

    sub = command('edit', cmd_edit, 'change measurements of a body')
    sub.add_argument('--mesh', required=True)
    sub.add_argument('--model')
    sub.add_argument('--map')
    sub.add_argument('--slot')
    sub.add_argument('--delta', type=float)
    sub.add_argument('--deltas', help='slot=delta pairs separated by commas')
    sub.add_argument('--no-remeasure', dest='no_remeasure', action='store_true')
    sub.add_argument('--out', required=True)

    sub = command('render', cmd_render, 'render a silhouette as PGM')
    sub.add_argument('--mesh', required=True)
    sub.add_argument('--view', choices=['frontal', 'lateral'], default='frontal')
    sub.add_argument('--height', type=float, help='subject height in millimeters, the mesh y-extent by default')
    sub.add_argument('--out', required=True)

    for name, handler, help_text in (('train-reg', cmd_train_reg, 'train the silhouette regressor'),
                                     ('eval', cmd_eval, 'evaluate the silhouette regressor')):
        sub = command(name, handler, help_text)
        sub.add_argument('--corpus')
        sub.add_argument('--split', type=float, default=0.5, help='share of the corpus used for training')
        if name == 'train-reg':
            sub.add_argument('--ridge', type=float)
        else:
            sub.add_argument('--regressor', required=True)
        sub.add_argument('--out', required=True)

    sub = command('roundtrip', cmd_roundtrip, 'measure, reconstruct and re-measure a corpus')
    sub.add_argument('--corpus')
    sub.add_argument('--model')
    sub.add_argument('--map')
    sub.add_argument('--regressor')
    sub.add_argument('--out', required=True)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
        logging.basicConfig(level=level, format='%(asctime)s - %(levelname)s - %(message)s')
        return args.handler(args, _settings(args))
    except BodyModelError as e:
        print(json.dumps(e.to_dict()), file=sys.stderr)
        return e.exit_code
