"""Command-line entry point: chat, serve, train, evaluate, gen-corpus."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import data_path
from .dialogue.nlg import NlgTemplateTable
from .gateway.sessions import SessionManager
from .nlu.corpus import Grammar, LabeledCorpus, generate_corpus
from .nlu.evaluate import evaluate_nlu
from .nlu.features import FeatureEncoder, Lexicons
from .nlu.rules import RuleBasedEngine, load_patterns
from .rec.catalog import ParseError, load_catalog
from .rec.usermodel import UserModel, summarize_user_model

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


def _print_config(args: argparse.Namespace) -> None:
    print("resolved config:")
    for key, value in sorted(vars(args).items()):
        if key == "func":
            continue
        print(f"  {key} = {value}")


def _load_catalog_arg(path) -> object:
    try:
        return load_catalog(path or data_path("catalog_sample.jsonl"))
    except FileNotFoundError as exc:
        raise UsageError(f"--catalog: no such file: {exc}") from exc
    except (OSError, ParseError) as exc:
        raise DataError(f"--catalog: {exc}") from exc


def _build_nlu(args, catalog):
    stoplist = Lexicons.load_word_list(data_path("stoplist.txt"))
    lexicons = Lexicons.from_catalog(catalog, stoplist)
    engine_name = getattr(args, "nlu", "rule")
    if engine_name == "rule":
        return RuleBasedEngine(load_patterns(data_path("rule_patterns.tsv")), lexicons)
    if engine_name == "crf":
        from .nlu.crf import load_crf
        from .nlu.joint import CrfEngine

        model_path = getattr(args, "nlu_model", None)
        if not model_path:
            raise UsageError("--nlu crf needs --nlu-model")
        try:
            model = load_crf(model_path)
        except (OSError, ValueError) as exc:
            raise DataError(f"--nlu-model: {exc}") from exc
        return CrfEngine(model, FeatureEncoder(lexicons))
    raise UsageError(f"unknown NLU engine {engine_name!r}")


def _build_policy(spec: str, observation_dim: int):
    from .policy.rules import RulePolicy
    from .policy.serialize import load_policy
    from .sim.metrics import RandomPolicy
    from .policy.actions import ACTION_COUNT

    if spec == "rule":
        return RulePolicy()
    if spec == "random":
        return RandomPolicy(ACTION_COUNT)
    try:
        policy = load_policy(spec)
    except (OSError, ValueError) as exc:
        raise DataError(f"--policy: {exc}") from exc
    if hasattr(policy, "net"):
        in_dim = policy.net.layer_sizes[0]
    else:
        in_dim = policy.net.trunk_w[0].shape[0]
    if in_dim != observation_dim:
        raise DataError(
            f"policy expects observation dim {in_dim}, environment provides {observation_dim}"
        )
    return policy


def _build_env(args, catalog):
    from .sim.env import DialogueEnv, RewardSpec

    nlu_engine = grammar = None
    if args.mode == "nlu":
        nlu_engine = _build_nlu(args, catalog)
        grammar = Grammar.load(data_path("user_grammar.tsv"))
    return DialogueEnv(
        catalog,
        mode=args.mode,
        encoder_kind=args.encoder,
        reward=RewardSpec.default(),
        patience=args.patience,
        p_comply=args.p_comply,
        p_remove=args.p_remove,
        nlu_engine=nlu_engine,
        grammar=grammar,
    )


# ----------------------------------------------------------------------
def cmd_chat(args) -> int:
    catalog = _load_catalog_arg(args.catalog)
    nlu_engine = _build_nlu(args, catalog)
    templates = NlgTemplateTable.load(data_path("nlg_templates.tsv"))
    policy = _build_policy(args.policy, 10 if args.encoder == "basic" else 30)
    manager = SessionManager(
        catalog, nlu_engine, policy, templates, encoder_kind=args.encoder, seed=args.seed
    )
    sess = manager.create_session()
    # Track a local user model so /model works without a login.
    sess.user_id = "local"
    sess.user_model = UserModel("local")

    for msg in manager.drain(sess.session_id):
        print(f"agent> {msg.payload.get('text', '')}")

    for raw in sys.stdin:
        line = raw.strip()
        if not line:
            continue
        if line == "/quit":
            break
        if line == "/state":
            for f in dataclasses.fields(sess.state):
                print(f"  {f.name} = {getattr(sess.state, f.name)}")
            continue
        if line == "/model":
            for statement in summarize_user_model(sess.user_model):
                print(f"  {statement}")
            continue
        if sess.terminated:
            print("agent> (the conversation has ended; /quit to exit)")
            continue
        for msg in manager.handle_user_message(sess.session_id, line):
            label = "agent" if msg.type == "agent_message" else msg.type
            print(f"{label}> {msg.payload.get('text', msg.payload)}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .gateway.server import GatewayConfig, serve

    try:
        config = GatewayConfig.load(args.config)
    except (OSError, ValueError) as exc:
        raise DataError(f"--config: {exc}") from exc
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    if args.catalog:
        config.catalog = args.catalog
    serve(config)
    return EXIT_OK


def cmd_train_policy(args) -> int:
    from .policy.train import TrainConfig, a2c_train, dqn_train

    if args.algo not in ("dqn", "a2c"):
        raise UsageError(f"unknown algorithm {args.algo!r}")
    catalog = _load_catalog_arg(args.catalog)
    env = _build_env(args, catalog)
    cfg = TrainConfig(episodes=args.episodes, seed=args.seed)
    train = dqn_train if args.algo == "dqn" else a2c_train
    result = train(env, cfg, encoder_kind=args.encoder)

    from .policy.serialize import save_policy

    save_policy(result.policy, args.out)
    if args.curve:
        result.write_curve(args.curve)
    rewards = [row.reward for row in result.curve]
    tail = rewards[-100:]
    print(f"trained {args.algo}/{args.encoder} for {args.episodes} episodes")
    print(f"mean reward (last {len(tail)} episodes): {sum(tail) / len(tail):.2f}")
    print(f"policy written to {args.out}")
    return EXIT_OK


def cmd_eval_policy(args) -> int:
    from .sim.metrics import RandomPolicy, compute_metrics, run_episodes
    from .policy.actions import ACTION_COUNT

    catalog = _load_catalog_arg(args.catalog)
    env = _build_env(args, catalog)
    policy = _build_policy(args.policy, env.observation_dim)
    logs = run_episodes(env, policy, args.episodes, seed=args.seed)
    metrics = compute_metrics(logs)
    print(f"policy: {args.policy}")
    print(metrics.table())
    if args.random_baseline:
        baseline = RandomPolicy(ACTION_COUNT, seed=args.seed)
        base_metrics = compute_metrics(run_episodes(env, baseline, args.episodes, args.seed))
        print("policy: random")
        print(base_metrics.table())
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(metrics.csv() + "\n")
    return EXIT_OK


def _load_corpus(args, catalog) -> LabeledCorpus:
    if args.corpus:
        try:
            corpus = LabeledCorpus.load(args.corpus)
        except (OSError, ValueError) as exc:
            raise DataError(f"--corpus: {exc}") from exc
    else:
        grammar = Grammar.load(data_path("user_grammar.tsv"))
        corpus = generate_corpus(
            grammar, catalog, args.n_per_intent, args.n_per_slot, seed=args.seed
        )
    if not corpus.records:
        raise UsageError("corpus is empty")
    return corpus


def cmd_train_nlu(args) -> int:
    from .nlu.crf import CrfTrainConfig, crf_train, save_crf

    catalog = _load_catalog_arg(args.catalog)
    corpus = _load_corpus(args, catalog)
    stoplist = Lexicons.load_word_list(data_path("stoplist.txt"))
    encoder = FeatureEncoder(Lexicons.from_catalog(catalog, stoplist))
    cfg = CrfTrainConfig(epochs=args.epochs, seed=args.seed)
    model, history = crf_train(corpus, encoder, cfg)
    save_crf(model, args.out)
    print(f"trained CRF on {len(corpus)} records for {args.epochs} epochs")
    print(f"final epoch mean log-likelihood: {history[-1]:.4f}")
    print(f"model written to {args.out}")
    return EXIT_OK


def _print_report(name: str, report) -> None:
    print(f"{'engine':<8} {'target':<8} {'precision':>10} {'recall':>10} {'f1':>10}")
    for target, prf in (("intent", report.intent), ("slot", report.slot)):
        print(
            f"{name:<8} {target:<8} {prf.precision:>10.4f} {prf.recall:>10.4f} {prf.f1:>10.4f}"
        )


def cmd_eval_nlu(args) -> int:
    catalog = _load_catalog_arg(args.catalog)
    corpus = _load_corpus(args, catalog)
    args.nlu = args.engine
    engine = _build_nlu(args, catalog)
    report = evaluate_nlu(engine, corpus)
    print(f"evaluated {report.n_records} records")
    _print_report(args.engine, report)
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    catalog = _load_catalog_arg(args.catalog)
    grammar = Grammar.load(data_path("user_grammar.tsv"))
    corpus = generate_corpus(
        grammar, catalog, args.n_per_intent, args.n_per_slot, seed=args.seed
    )
    corpus.save(args.out)
    print(f"wrote {len(corpus)} records to {args.out}")
    return EXIT_OK


# ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moviebot")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--catalog", default=None, help="catalog JSON-lines path")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("chat", help="interactive terminal chat")
    common(p)
    p.add_argument("--nlu", choices=["rule", "crf"], default="rule")
    p.add_argument("--nlu-model", default=None)
    p.add_argument("--policy", default="rule", help="'rule' or a policy file")
    p.add_argument("--encoder", choices=["basic", "with_intents"], default="basic")
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("serve", help="run the HTTP/WebSocket gateway")
    p.add_argument("--config", default=None)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--catalog", default=None)
    p.set_defaults(func=cmd_serve)

    def env_opts(p):
        p.add_argument("--mode", choices=["annotation", "nlu"], default="annotation")
        p.add_argument("--encoder", choices=["basic", "with_intents"], default="basic")
        p.add_argument("--patience", type=int, default=30)
        p.add_argument("--p-comply", type=float, default=0.9)
        p.add_argument("--p-remove", type=float, default=0.05)
        p.add_argument("--nlu", choices=["rule", "crf"], default="rule")
        p.add_argument("--nlu-model", default=None)

    p = sub.add_parser("train-policy", help="train a DQN or A2C dialogue policy")
    common(p)
    env_opts(p)
    p.add_argument("--algo", default="dqn")
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.add_argument("--curve", default=None, help="training-curve CSV path")
    p.set_defaults(func=cmd_train_policy)

    p = sub.add_parser("eval-policy", help="evaluate a policy in simulation")
    common(p)
    env_opts(p)
    p.add_argument("--policy", default="rule", help="'rule', 'random', or a policy file")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--random-baseline", action="store_true")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_eval_policy)

    def corpus_opts(p):
        p.add_argument("--corpus", default=None, help="labeled TSV corpus path")
        p.add_argument("--n-per-intent", type=int, default=30)
        p.add_argument("--n-per-slot", type=int, default=30)

    p = sub.add_parser("train-nlu", help="train the CRF NLU model")
    common(p)
    corpus_opts(p)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_nlu)

    p = sub.add_parser("eval-nlu", help="evaluate an NLU engine on a corpus")
    common(p)
    corpus_opts(p)
    p.add_argument("--engine", choices=["rule", "crf"], default="rule")
    p.add_argument("--nlu-model", default=None)
    p.set_defaults(func=cmd_eval_nlu)

    p = sub.add_parser("gen-corpus", help="expand the user grammar into a corpus")
    common(p)
    p.add_argument("--n-per-intent", type=int, default=30)
    p.add_argument("--n-per-slot", type=int, default=30)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_corpus)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _print_config(args)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
