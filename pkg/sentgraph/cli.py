#!/usr/bin/env python3
"""
Command-line entry point: synthetic data, word pretraining, joint
training, evaluation, statistics and sweeps
"""
import argparse
import logging
import sys
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence

from dotenv import load_dotenv

from . import __version__
from .config import (get_config, load_run_file, parse_bool, require_input_file, require_output_path,
                     resolve_setting)
from .errors import ConfigError, SentgraphError
from .evaluation import DEFAULT_ITERS, DEFAULT_LAMBDA, DEFAULT_RATIOS, DEFAULT_TRIALS, evaluate, load_labels
from .graph_core import PAD_ID, load_contents, load_network, network_stats, NetworkStats
from .logging_setup import configure_logging
from .params import DEFAULT_DIM, ENCODER_KINDS, EXPORT_KINDS, export_embeddings, init_params, \
    load_word_vectors, read_embeddings, write_vectors
from .sweeps import DEFAULT_ALPHAS, DEFAULT_EPOCH_GRID, alpha_sweep, epoch_sweep, sweep_csv, write_sweep_csv
from .synth import SynthConfig, generate
from .trainer import TrainConfig, train, write_loss_trace
from .word_pretrain import PretrainConfig, pretrain_words

logger = logging.getLogger(__name__)


def _float_list(text) -> List[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(',') if v.strip()]


def _int_list(text) -> List[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).split(',') if v.strip()]


def _optional_float(text) -> Optional[float]:
    if text is None or str(text).strip().lower() in ('', 'none', 'off'):
        return None
    return float(text)


@dataclass(frozen=True)
class Option:
    """One setting: a command-line flag and the matching run-file key"""
    name: str
    cast: Callable[[Any], Any]
    default: Any
    help: str
    choices: Optional[Sequence[str]] = None
    switch: bool = False
    required: bool = False

    @property
    def flag(self) -> str:
        return '--' + self.name.rstrip('_').replace('_', '-')


def _seed_default() -> int:
    return get_config().DEFAULT_SEED


def _workers_default() -> int:
    return get_config().DEFAULT_WORKERS


GRAPH_OPTIONS = [
    Option('edges', str, None, "edge file, one 'src<TAB>dst' per line", required=True),
    Option('contents', str, None, "content file, one 'node_key<TAB>document' per line"),
    Option('directed', parse_bool, True, "treat edges as directed (false adds both directions); "
           "the node-node score is chosen by --score",
           choices=('true', 'false')),
    Option('min_count', int, 1, "words seen fewer times map to UNK"),
]

TRAIN_OPTIONS = [
    Option('alpha', float, 0.5, "probability of a node-node step"),
    Option('encoder', str, 'wavg', "sentence encoder", choices=ENCODER_KINDS),
    Option('dim', int, DEFAULT_DIM, "embedding dimension (even)"),
    Option('epochs', int, 100, "passes over |E_nn| + |E_nc| steps"),
    Option('max_steps', int, None, "explicit step count, overrides --epochs"),
    Option('eta0', float, None, "initial learning rate (0.025 for wavg, 0.01 for gru/bigru)"),
    Option('neg_nn', int, 15, "negatives per node-node step"),
    Option('neg_nc', int, 25, "negatives per node-content step"),
    Option('word_vectors', str, None, "pretrained word vectors in embedding format"),
    Option('freeze_words', parse_bool, False, "keep word vectors fixed during training", switch=True),
    Option('score', str, 'directed', "node-node score", choices=('directed', 'symmetric')),
    Option('grad_clip', _optional_float, None, "max L2 norm of encoder gradients per step (off by default)"),
    Option('uniform_negatives', parse_bool, False, "sample negatives uniformly", switch=True),
    Option('workers', int, None, "training threads (1 is reproducible)"),
    Option('seed', int, None, "random seed"),
]

EVAL_OPTIONS = [
    Option('labels', str, None, "labels file, one 'node_key<TAB>label' per line", required=True),
    Option('trials', int, DEFAULT_TRIALS, "independent splits per training ratio"),
    Option('lambda_', float, DEFAULT_LAMBDA, "L2 strength of the logistic regression"),
    Option('iters', int, DEFAULT_ITERS, "gradient descent iteration cap"),
]

COMMAND_OPTIONS: Dict[str, List[Option]] = {
    'gen-synth': [
        Option('out_dir', str, '.', "directory for the generated files"),
        Option('prefix', str, 'synth', "file name prefix"),
        Option('nodes', int, 200, "number of nodes"),
        Option('communities', int, 2, "number of communities (labels)"),
        Option('p_in', float, 0.05, "edge probability within a community"),
        Option('p_out', float, 0.005, "edge probability across communities"),
        Option('docs_per_node', int, 2, "documents per node"),
        Option('sentences_per_doc', int, 2, "sentences per document"),
        Option('min_sentence_len', int, 4, "shortest sentence"),
        Option('max_sentence_len', int, 10, "longest sentence"),
        Option('vocab_per_community', int, 50, "words private to each community"),
        Option('vocab_shared', int, 200, "words shared by all communities"),
        Option('content_signal', float, 0.5, "probability a word comes from the community vocabulary"),
        Option('seed', int, None, "random seed"),
    ],
    'pretrain-words': [
        Option('contents', str, None, "content file", required=True),
        Option('output', str, None, "word vector output file", required=True),
        Option('dim', int, DEFAULT_DIM, "word vector dimension"),
        Option('window', int, 5, "context window"),
        Option('neg', int, 15, "negatives per context pair"),
        Option('epochs', int, 5, "passes over the corpus"),
        Option('eta0', float, 0.025, "initial learning rate"),
        Option('min_count', int, 1, "words seen fewer times map to UNK"),
        Option('subsample', parse_bool, False, "subsample frequent words", switch=True),
        Option('workers', int, None, "training threads (1 is reproducible)"),
        Option('seed', int, None, "random seed"),
    ],
    'train': GRAPH_OPTIONS + TRAIN_OPTIONS + [
        Option('output', str, None, "embedding output file", required=True),
        Option('export', str, 'full', "which half to export", choices=EXPORT_KINDS),
        Option('loss_trace', str, None, "loss trace CSV output file"),
    ],
    'eval': [
        Option('embeddings', str, None, "embedding file", required=True),
        Option('ratios', _float_list, list(DEFAULT_RATIOS), "comma-separated training ratios"),
        Option('output', str, None, "report CSV file (stdout when omitted)"),
        Option('workers', int, None, "parallel trials"),
        Option('seed', int, None, "random seed"),
    ] + EVAL_OPTIONS,
    'stats': GRAPH_OPTIONS,
    'sweep-alpha': GRAPH_OPTIONS + TRAIN_OPTIONS + EVAL_OPTIONS + [
        Option('alphas', _float_list, list(DEFAULT_ALPHAS), "comma-separated balance weights"),
        Option('ratio', float, 0.5, "training ratio"),
        Option('output', str, None, "sweep CSV file (stdout when omitted)"),
    ],
    'sweep-epochs': GRAPH_OPTIONS + TRAIN_OPTIONS + EVAL_OPTIONS + [
        Option('epoch_grid', _int_list, list(DEFAULT_EPOCH_GRID), "comma-separated epoch counts"),
        Option('ratio', float, 0.5, "training ratio"),
        Option('output', str, None, "sweep CSV file (stdout when omitted)"),
    ],
}

COMMAND_HELP = {
    'gen-synth': "generate a labeled synthetic network",
    'pretrain-words': "pretrain word vectors with skip-gram",
    'train': "jointly train node embeddings",
    'eval': "node classification Micro-F1 over random splits",
    'stats': "print augmented network statistics",
    'sweep-alpha': "train and evaluate over a grid of balance weights",
    'sweep-epochs': "train and evaluate over a grid of epoch counts",
}


class RunConfig:
    """
    Resolved settings of one command.

    Precedence: command-line flag > run file (--config) > SENTGRAPH_<KEY>
    environment variable > built-in default.
    """

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        options = COMMAND_OPTIONS[command]
        file_values = {}
        if getattr(args, 'config', None):
            file_values = load_run_file(args.config, [self._file_key(o) for o in options])

        self.values: Dict[str, Any] = {}
        for option in options:
            value = resolve_setting(self._file_key(option), getattr(args, option.name),
                                    file_values, option.default, option.cast)
            if option.choices is not None and value is not None and option.cast is str \
                    and value not in option.choices:
                raise ConfigError(f"{option.flag} must be one of {', '.join(option.choices)}, got {value!r}")
            if option.required and value is None:
                raise ConfigError(f"Missing required setting {option.flag}")
            self.values[option.name] = value

        if 'seed' in self.values and self.values['seed'] is None:
            self.values['seed'] = _seed_default()
        if 'workers' in self.values and self.values['workers'] is None:
            self.values['workers'] = _workers_default()

    @staticmethod
    def _file_key(option: Option) -> str:
        return option.name.rstrip('_')

    def __getattr__(self, name: str) -> Any:
        values = self.__dict__.get('values', {})
        if name in values:
            return values[name]
        raise AttributeError(name)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            alpha=self.alpha, d=self.dim, encoder_kind=self.encoder, neg_nn=self.neg_nn, neg_nc=self.neg_nc,
            eta0=self.eta0, epochs=self.epochs, max_steps=self.max_steps,
            directed_score=self.score == 'directed', seed=self.seed, workers=self.workers,
            freeze_words=self.freeze_words, grad_clip=self.grad_clip,
            uniform_negatives=self.uniform_negatives, debug_checks=get_config().DEBUG_CHECKS,
        )

    def pretrain_config(self) -> PretrainConfig:
        return PretrainConfig(window=self.window, neg=self.neg, epochs=self.epochs, eta0=self.eta0,
                              d_w=self.dim, workers=self.workers, subsample=self.subsample)

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            nodes=self.nodes, communities=self.communities, p_in=self.p_in, p_out=self.p_out,
            docs_per_node=self.docs_per_node, sentences_per_doc=self.sentences_per_doc,
            sentence_len_range=(self.min_sentence_len, self.max_sentence_len),
            vocab_per_community=self.vocab_per_community, vocab_shared=self.vocab_shared,
            content_signal=self.content_signal, seed=self.seed,
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='sentgraph',
                                     description='Network embeddings from structure and sentence content')
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('--log-level', help='logging level (default: from SENTGRAPH_LOG_LEVEL or INFO)')
    subparsers = parser.add_subparsers(dest='command', required=True)

    for command, options in COMMAND_OPTIONS.items():
        sub = subparsers.add_parser(command, help=COMMAND_HELP[command], description=COMMAND_HELP[command])
        sub.add_argument('--config', help="run file of 'key = value' lines; flags override it")
        for option in options:
            default_text = 'required' if option.required else f"default: {option.default}"
            help_text = f"{option.help} ({default_text})"
            if option.switch:
                sub.add_argument(option.flag, dest=option.name, action='store_const', const=True,
                                 default=None, help=help_text)
            else:
                choices = list(option.choices) if option.choices and option.cast is str else None
                sub.add_argument(option.flag, dest=option.name, type=option.cast, choices=choices,
                                 default=None, help=help_text,
                                 metavar='{true,false}' if option.cast is parse_bool else None)
    return parser


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(text)
    sys.stdout.write(text)


def cmd_gen_synth(run: RunConfig) -> int:
    config = run.synth_config()
    files = generate(config, run.out_dir, prefix=run.prefix)
    sys.stdout.write('file,path,count\n')
    sys.stdout.write(f"edges,{files.edges},{files.edge_count}\n")
    sys.stdout.write(f"contents,{files.contents},{files.document_count}\n")
    sys.stdout.write(f"labels,{files.labels},{files.node_count}\n")
    return 0


def cmd_pretrain_words(run: RunConfig) -> int:
    contents = require_input_file(run.contents, 'Content file')
    output = require_output_path(run.output, 'word vector output')
    vocab, pairs = load_contents(contents, vocab_min_count=run.min_count)
    sentences = [sentence for _, sentence in pairs]
    table = pretrain_words(sentences, run.pretrain_config(), seed=run.seed, vocab_size=len(vocab),
                           counts=vocab.counts)
    write_vectors(output, vocab.words[PAD_ID + 1:], table[PAD_ID + 1:])
    sys.stdout.write('output,words,dim\n')
    sys.stdout.write(f"{output},{len(vocab) - 1},{table.shape[1]}\n")
    return 0


def _load_inputs(run: RunConfig, need_contents: bool):
    edges = require_input_file(run.edges, 'Edge file')
    contents = require_input_file(run.contents, 'Content file') if run.contents else None
    if need_contents and contents is None:
        raise ConfigError("--contents is required when alpha < 1")
    word_vectors = require_input_file(run.word_vectors, 'Word vector file') \
        if getattr(run, 'word_vectors', None) else None
    network, vocab = load_network(edges, contents, directed=run.directed, vocab_min_count=run.min_count)
    return network, vocab, word_vectors


def _initial_word_table(run: RunConfig, network, vocab, word_vectors):
    if word_vectors is None:
        return None
    params = init_params(network.node_count, len(vocab), run.dim, run.encoder, run.seed)
    table, _ = load_word_vectors(word_vectors, vocab, params.word_table)
    return table


def cmd_train(run: RunConfig) -> int:
    config = run.train_config()
    config.validate()
    output = require_output_path(run.output, 'embedding output')
    loss_trace = require_output_path(run.loss_trace, 'loss trace') if run.loss_trace else None
    network, vocab, word_vectors = _load_inputs(run, need_contents=config.alpha < 1.0)

    params = init_params(network.node_count, len(vocab), config.d, config.encoder_kind, config.seed,
                         freeze_words=config.freeze_words, node_keys=network.node_keys)
    if word_vectors is not None:
        params.word_table, _ = load_word_vectors(word_vectors, vocab, params.word_table)

    result = train(network, params, config)
    export_embeddings(params, output, which=run.export)
    if loss_trace is not None:
        write_loss_trace(loss_trace, result.loss_trace)

    sys.stdout.write('embeddings,loss_trace,steps,nn_steps,nc_steps\n')
    sys.stdout.write(f"{output},{loss_trace or ''},{result.max_steps},{result.nn_steps},{result.nc_steps}\n")
    return 0


def cmd_eval(run: RunConfig) -> int:
    embeddings_path = require_input_file(run.embeddings, 'Embedding file')
    labels_path = require_input_file(run.labels, 'Labels file')
    if run.output:
        require_output_path(run.output, 'report')
    keys, matrix = read_embeddings(embeddings_path)
    labeled = load_labels(labels_path)
    report = evaluate(dict(zip(keys, matrix)), labeled, ratios=run.ratios, trials=run.trials, seed=run.seed,
                      lam=run.lambda_, iters=run.iters, workers=run.workers)
    _emit(report.to_csv(), run.output)
    return 0


def cmd_stats(run: RunConfig) -> int:
    network, vocab, _ = _load_inputs(run, need_contents=False)
    stats = network_stats(network, vocab if run.contents else None)
    sys.stdout.write(NetworkStats.CSV_HEADER + '\n' + stats.csv_row() + '\n')
    return 0


def _cmd_sweep(run: RunConfig, name: str) -> int:
    config = run.train_config()
    config.validate()
    if run.output:
        require_output_path(run.output, 'sweep output')
    labeled = load_labels(require_input_file(run.labels, 'Labels file'))
    need_contents = (name == 'epochs' and config.alpha < 1.0) or (name == 'alpha' and min(run.alphas) < 1.0)
    network, vocab, word_vectors = _load_inputs(run, need_contents=need_contents)
    word_table = _initial_word_table(run, network, vocab, word_vectors)
    common = dict(ratio=run.ratio, trials=run.trials, seed=run.seed, lam=run.lambda_, iters=run.iters,
                  word_table=word_table)
    if name == 'alpha':
        rows = alpha_sweep(network, len(vocab), labeled, config, alphas=run.alphas, **common)
    else:
        rows = epoch_sweep(network, len(vocab), labeled, config, epoch_grid=run.epoch_grid, **common)
    if run.output:
        write_sweep_csv(run.output, name, rows)
    sys.stdout.write(sweep_csv(name, rows))
    return 0


COMMANDS = {
    'gen-synth': cmd_gen_synth,
    'pretrain-words': cmd_pretrain_words,
    'train': cmd_train,
    'eval': cmd_eval,
    'stats': cmd_stats,
    'sweep-alpha': lambda run: _cmd_sweep(run, 'alpha'),
    'sweep-epochs': lambda run: _cmd_sweep(run, 'epochs'),
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        configure_logging(args.log_level)
        run = RunConfig(args.command, args)
        return COMMANDS[args.command](run)
    except (SentgraphError, OSError) as e:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
