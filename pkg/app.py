"""
PlantWatch command line.

    simulate    five-tank sample log (+ ground truth)
    learn       timed automaton from a sample log
    detect      anomaly reports for a sample log against an automaton
    kg export   Turtle export of plant, automaton and anomalies
    kg query    competency question or JSON query over Turtle files (TSV)
"""

from __future__ import annotations

import os
import sys
import logging
import argparse
from typing import Iterable, NoReturn, Optional, Sequence

from config import Config, get_config
from agents.detector_agent import DetectorAgent, ResyncPolicy, reports_from_rows
from agents.learner_agent import LearnerAgent
from agents.simulator_agent import (
    FaultSpec,
    FiveTankSimulator,
    PlantConfig,
    default_config,
    reference_clogging,
    reference_leakage,
)
from knowledge.competency import competency_query
from knowledge.graph import KnowledgeGraph
from knowledge.mapper import KnowledgeGraphMapper
from knowledge.query import Query, format_tsv, query
from knowledge.turtle import read_turtle, write_turtle
from knowledge.vocabulary import VOCABULARY_PREFIXES
from models.automaton import TimedAutomaton
from models.events import (
    RawSample,
    StateVector,
    coalesce_samples,
    records_to_rows,
    samples_from_rows,
    samples_to_rows,
    signal_ordering_from_samples,
)
from models.plant import load_facts
from utils.errors import PipelineError
from utils.integrity import PipelineManifest, hash_config
from utils.serialization import read_json, read_jsonl, write_json, write_jsonl
from utils.validators import ValidationError, validate_input

logger = logging.getLogger('plantwatch')

TOOL_VERSION = '1.0.0'

EXIT_OK = 0
EXIT_ANOMALIES = 3
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NO_INPUT = 66
EXIT_SOFTWARE = 70

REFERENCE_FAULTS = {
    'clogging': reference_clogging,
    'leakage': reference_leakage,
}


class UsageError(Exception):
    """Raised for invalid command line usage"""
    pass


class PipelineArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


_log_handler: Optional[logging.Handler] = None


def setup_logging(level: str = 'INFO') -> None:
    """Send log records to stderr; stdout carries command results only"""
    global _log_handler
    root = logging.getLogger()
    if _log_handler is not None:
        root.removeHandler(_log_handler)
    _log_handler = logging.StreamHandler(sys.stderr)
    _log_handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)s %(name)s: %(message)s'))
    root.addHandler(_log_handler)
    root.setLevel(getattr(logging, str(level).upper(), logging.INFO))


def _output_dir(path: str) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    return directory


def _sibling(path: str, suffix: str) -> str:
    return os.path.splitext(path)[0] + suffix


def _record(
    directory: str,
    command: str,
    paths: Iterable[str],
    seed: Optional[int] = None,
    config_hash: Optional[str] = None,
) -> None:
    manifest = PipelineManifest.load(directory, TOOL_VERSION)
    for path in paths:
        manifest.record(path, command, seed=seed, config_hash=config_hash)
        logger.info(f"Wrote {path}")
    manifest.save()


def cmd_simulate(args: argparse.Namespace, cfg: type[Config]) -> int:
    if args.config:
        plant_config = PlantConfig.from_dict(read_json(args.config))
    else:
        plant_config = default_config(seed=cfg.DEFAULT_SEED)
    plant_config = plant_config.with_run(
        cycles=None if args.cycles is None else validate_input('cycles', args.cycles),
        seed=None if args.seed is None else validate_input('seed', args.seed),
    )

    faults = [FaultSpec.parse(text) for text in args.fault]
    faults.extend(REFERENCE_FAULTS[name]() for name in args.reference_fault)

    result = FiveTankSimulator(plant_config, faults).simulate()

    directory = _output_dir(args.out)
    truth_path = _sibling(args.out, '.truth.json')
    write_jsonl(args.out, samples_to_rows(result.samples))
    write_json(truth_path, result.ground_truth)

    config_hash = hash_config({
        'config': plant_config.to_dict(),
        'faults': [fault.to_dict() for fault in faults],
    })
    _record(directory, 'simulate', [args.out, truth_path],
            seed=plant_config.seed, config_hash=config_hash)
    return EXIT_OK


def _initial_vector(
    samples: Sequence[RawSample], signals_arg: Optional[str], initial_arg: Optional[str]
) -> StateVector:
    if signals_arg:
        signals = tuple(validate_input('signal', s) for s in signals_arg.split(','))
    else:
        signals = signal_ordering_from_samples(samples)
    if initial_arg is None:
        return StateVector.zeros(signals)
    values = validate_input('vector', initial_arg)
    if len(values) != len(signals):
        raise ValidationError(f"--initial has {len(values)} values for {len(signals)} signals")
    return StateVector(signals, values)


def cmd_learn(args: argparse.Namespace, cfg: type[Config]) -> int:
    cycle_ms = validate_input('cycle_ms', args.cycle_ms if args.cycle_ms is not None else cfg.CYCLE_MS)
    window = args.window if args.window is not None else cfg.CONVERGENCE_WINDOW
    if window is not None:
        window = validate_input('positive_int', window, field_name='Convergence window')

    samples = samples_from_rows(read_jsonl(args.samples))
    initial = _initial_vector(samples, args.signals, args.initial)

    agent = LearnerAgent(cycle_ms, window)
    records = agent.coalesce(samples, initial)
    automaton = agent.learn_records(records, initial)

    directory = _output_dir(args.out)
    events_path = _sibling(args.out, '.events.jsonl')
    write_jsonl(events_path, records_to_rows(records))
    write_json(args.out, automaton.to_dict())

    config_hash = hash_config({'cycle_ms': cycle_ms, 'window': window, 'initial': list(initial.values)})
    _record(directory, 'learn', [events_path, args.out],
            config_hash=config_hash)
    return EXIT_OK


def cmd_detect(args: argparse.Namespace, cfg: type[Config]) -> int:
    cycle_ms = validate_input('cycle_ms', args.cycle_ms if args.cycle_ms is not None else cfg.CYCLE_MS)
    policy = ResyncPolicy(validate_input('policy', args.policy or cfg.DETECTOR_POLICY))
    window = validate_input('positive_int', args.syndrome_window or cfg.SYNDROME_WINDOW_MS,
                            field_name='Syndrome window')

    automaton = TimedAutomaton.from_dict(read_json(args.automaton))
    start_state = automaton.initial if args.start is None else validate_input('state_ref', args.start)
    if start_state not in automaton.states:
        raise ValidationError(f"Start state q{start_state} is not a state of {args.automaton}")

    samples = samples_from_rows(read_jsonl(args.samples))
    records = coalesce_samples(samples, automaton.vector(start_state), cycle_ms)

    agent = DetectorAgent(automaton, policy, window)
    result, syndromes = agent.detect(records, start_state)

    directory = _output_dir(args.out)
    write_jsonl(args.out, agent.report_rows(result.reports, syndromes))
    config_hash = hash_config({'cycle_ms': cycle_ms, 'policy': policy.value, 'syndrome_window_ms': window,
                               'start': start_state})
    _record(directory, 'detect', [args.out], config_hash=config_hash)

    if result.unprocessed:
        logger.warning(f"Detector halted with {result.unprocessed} events unprocessed")
    return EXIT_ANOMALIES if result.reports else EXIT_OK


def cmd_kg_export(args: argparse.Namespace, cfg: type[Config]) -> int:
    facts_dir = args.facts or cfg.FACTS_DIR
    facts = load_facts(facts_dir, hierarchy_path=args.hierarchy, devices_path=args.devices)
    owner = validate_input('entity', args.owner or cfg.OWNER_ENTITY)
    mapper = KnowledgeGraphMapper(facts, validate_input('iri', args.base_iri or cfg.BASE_IRI),
                                  args.plant or cfg.PLANT_NAME)

    automaton = TimedAutomaton.from_dict(read_json(args.automaton))
    plant_graph = mapper.map_plant()
    automaton_graph = mapper.map_automaton(automaton, owner)
    if args.anomalies:
        reports, syndromes = reports_from_rows(read_jsonl(args.anomalies))
    else:
        reports, syndromes = [], []
    anomaly_graph = mapper.map_anomalies(reports, syndromes, mapper.iris.machine(owner), automaton_graph)
    merged = KnowledgeGraph.union([plant_graph, automaton_graph, anomaly_graph])

    os.makedirs(args.out, exist_ok=True)
    paths = []
    for name, graph in (('plant', plant_graph), ('automaton', automaton_graph),
                        ('anomalies', anomaly_graph), ('merged', merged)):
        path = os.path.join(args.out, f"{name}.ttl")
        write_turtle(path, graph)
        paths.append(path)

    config_hash = hash_config({'owner': owner, 'base_iri': mapper.iris.base_iri, 'plant': mapper.iris.plant})
    _record(args.out, 'kg export', paths, config_hash=config_hash)
    return EXIT_OK


def cmd_kg_query(args: argparse.Namespace, cfg: type[Config]) -> int:
    graph = KnowledgeGraph.union(read_turtle(path) for path in args.files)
    if args.cq:
        try:
            compiled = competency_query(args.cq).query
        except KeyError as e:
            raise UsageError(str(e.args[0]))
    else:
        prefixes = dict(VOCABULARY_PREFIXES)
        prefixes.update(graph.prefixes)
        compiled = Query.from_json(read_json(args.query), prefixes)

    rows = query(graph, compiled)
    sys.stdout.write(format_tsv(compiled, rows))
    return EXIT_OK


def create_parser() -> PipelineArgumentParser:
    """Argument parser with the simulate / learn / detect / kg command tree"""
    parser = PipelineArgumentParser(prog='plantwatch', description='Timed automata monitoring for CPPS')
    parser.add_argument('--env', help='Configuration name (development, production, testing)')
    parser.add_argument('--log-level', help='Override LOG_LEVEL')
    commands = parser.add_subparsers(dest='command', required=True, parser_class=PipelineArgumentParser)

    simulate = commands.add_parser('simulate', help='Run the five-tank surrogate')
    simulate.add_argument('--config', help='Plant configuration JSON')
    simulate.add_argument('--cycles', type=int)
    simulate.add_argument('--seed', type=int)
    simulate.add_argument('--fault', action='append', default=[], metavar='KIND:PHASE:ONSET:MAG[:DUR]')
    simulate.add_argument('--reference-fault', action='append', default=[], choices=sorted(REFERENCE_FAULTS))
    simulate.add_argument('--out', required=True, help='Sample log JSONL')
    simulate.set_defaults(handler=cmd_simulate)

    learn = commands.add_parser('learn', help='Learn a timed automaton')
    learn.add_argument('samples', help='Sample log JSONL')
    learn.add_argument('--signals', help='Comma separated signal ordering')
    learn.add_argument('--initial', help='Comma separated initial vector (default all zero)')
    learn.add_argument('--cycle-ms', type=int)
    learn.add_argument('--window', type=int, help='Convergence window (default max(50, 3*|T|))')
    learn.add_argument('--out', required=True, help='Automaton JSON')
    learn.set_defaults(handler=cmd_learn)

    detect = commands.add_parser('detect', help='Detect anomalies in a sample log')
    detect.add_argument('automaton', help='Automaton JSON')
    detect.add_argument('samples', help='Sample log JSONL')
    detect.add_argument('--policy', choices=[p.value for p in ResyncPolicy])
    detect.add_argument('--start', help='Start state, e.g. q0')
    detect.add_argument('--cycle-ms', type=int)
    detect.add_argument('--syndrome-window', type=int)
    detect.add_argument('--out', required=True, help='Anomaly report JSONL')
    detect.set_defaults(handler=cmd_detect)

    kg = commands.add_parser('kg', help='Knowledge graph export and queries')
    kg_commands = kg.add_subparsers(dest='kg_command', required=True, parser_class=PipelineArgumentParser)

    export = kg_commands.add_parser('export', help='Write Turtle files')
    export.add_argument('--automaton', required=True)
    export.add_argument('--facts', help='Directory with hierarchy.csv and devices.csv')
    export.add_argument('--hierarchy')
    export.add_argument('--devices')
    export.add_argument('--anomalies')
    export.add_argument('--owner')
    export.add_argument('--base-iri')
    export.add_argument('--plant')
    export.add_argument('--out', required=True, help='Output directory')
    export.set_defaults(handler=cmd_kg_export)

    kg_query = kg_commands.add_parser('query', help='Query Turtle files, TSV to stdout')
    kg_query.add_argument('files', nargs='+')
    selector = kg_query.add_mutually_exclusive_group(required=True)
    selector.add_argument('--cq', help='Competency question id, e.g. CQ10')
    selector.add_argument('--query', help='Query JSON file')
    kg_query.set_defaults(handler=cmd_kg_query)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code"""
    try:
        args = create_parser().parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_USAGE
    except SystemExit as e:
        return e.code or EXIT_OK

    cfg = get_config(args.env)
    setup_logging(args.log_level or cfg.LOG_LEVEL)

    try:
        cfg.validate_config()
        return args.handler(args, cfg)
    except UsageError as e:
        logger.error(str(e))
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError) as e:
        logger.error(f"Cannot read {e.filename}: {e.strerror}")
        return EXIT_NO_INPUT
    except PipelineError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_DATA
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return EXIT_SOFTWARE


if __name__ == '__main__':
    sys.exit(main())
