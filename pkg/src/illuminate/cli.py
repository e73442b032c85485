"""Command-line driver: ingest, split, train, eval, explain, diagnose,
chat, serve, and the benchmark sweeps."""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from .classify import (
    TrainConfig,
    grid_search_cv,
    load_checkpoint,
    save_checkpoint,
    train_cnn,
    train_logreg,
    train_svm_rff,
)
from .classify.pipeline import TextClassifier
from .corpus import (
    PseudoLabelConfig,
    SplitSpec,
    TfidfLogRegTeacher,
    load_jsonl,
    pseudo_label,
    read_split_manifest,
    stratified_split,
    write_jsonl,
    write_split_manifest,
)
from .errors import IlluminateError
from .explain import explain as lime_explain
from .llmclient import (
    BackendConfig,
    CompletionRequest,
    load_mock_script,
    make_backend,
)
from .metrics import prf_report, response_similarity, rouge_text
from .prompts import (
    DialogueState,
    PlanConfig,
    build_diagnose_prompt,
    build_turn_request,
    load_default_cbt_db,
    load_default_cbt_table,
    load_exemplar_bank,
    next_turn,
    parse_diagnosis,
    plan_treatment,
)
from .textprep import (
    embed_sequence,
    fit_tfidf,
    load_embeddings,
    preprocess,
    tfidf_transform,
)


def _default_bank():
    with resources.as_file(
        resources.files("illuminate").joinpath("data/exemplar_bank.jsonl")
    ) as path:
        return load_exemplar_bank(path)


def _backend_from_args(args):
    if getattr(args, "mock_script", None):
        return load_mock_script(args.mock_script, default=getattr(args, "mock_default", None))
    if getattr(args, "backend_config", None):
        raw = json.loads(Path(args.backend_config).read_text(encoding="utf-8"))
        return make_backend(BackendConfig(**raw))
    raise IlluminateError("provide --mock-script or --backend-config")


def _partition_posts(args, dataset):
    if getattr(args, "manifest", None):
        split = read_split_manifest(args.manifest)
        wanted = getattr(args, "partition", "train")
        return [p for p in dataset.posts if split.get(p.id) == wanted]
    return dataset.labeled()


def _print_json(payload) -> None:
    print(json.dumps(payload, sort_keys=True))


def cmd_ingest(args) -> int:
    ds = load_jsonl(args.input)
    if args.output:
        write_jsonl(ds.posts, args.output)
    _print_json(
        {
            "posts": len(ds.posts),
            "labeled": len(ds.labeled()),
            "unlabeled": len(ds.unlabeled()),
        }
    )
    return 0


def cmd_split(args) -> int:
    ds = load_jsonl(args.input)
    spec = SplitSpec(
        train_frac=args.train_frac,
        val_frac=args.val_frac,
        test_frac=args.test_frac,
        seed=args.seed,
    )
    split_ds = stratified_split(ds, spec)
    write_split_manifest(split_ds, args.manifest_out)
    counts = {name: len(split_ds.partition(name)) for name in ("train", "val", "test")}
    _print_json(counts)
    return 0


def cmd_pseudolabel(args) -> int:
    labeled = load_jsonl(args.labeled).labeled()
    unlabeled = load_jsonl(args.unlabeled).unlabeled()
    teacher = TfidfLogRegTeacher(
        labeled, cap=args.cap, train_cfg=TrainConfig(seed=args.seed, epochs=400, learning_rate=0.3)
    )
    cfg = PseudoLabelConfig(confidence_threshold=args.tau, max_rounds=args.max_rounds)
    admitted = pseudo_label(teacher, unlabeled, cfg)
    write_jsonl(admitted, args.output)
    _print_json({"admitted": len(admitted), "remaining": len(unlabeled) - len(admitted)})
    return 0


def _embedding_fingerprint(path: str) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def cmd_train(args) -> int:
    ds = load_jsonl(args.data)
    posts = _partition_posts(args, ds)
    if not posts:
        raise IlluminateError("no labeled training posts selected")
    y = [p.label for p in posts]
    cfg = TrainConfig(
        seed=args.seed,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
    )
    summary: dict = {"model": args.model, "n_train": len(posts)}

    if args.model in ("logreg", "svm"):
        docs = [preprocess(p.text) for p in posts]
        vocab = fit_tfidf(docs, cap=args.cap)
        X = [tfidf_transform(vocab, d) for d in docs]
        if args.model == "logreg":
            if args.grid_c:
                grid = [{"C": float(c)} for c in args.grid_c.split(",")]

                def trainer(Xf, yf, C):
                    return train_logreg(Xf, yf, cfg, C=C, n_features=vocab.size)

                best, scores = grid_search_cv(
                    trainer, grid, k=args.folds, X=X, y=y, seed=args.seed
                )
                summary["grid_scores"] = dict(zip([g["C"] for g in grid], scores))
                summary["best_C"] = best["C"]
                chosen_c = best["C"]
            else:
                chosen_c = args.C
            model = train_logreg(X, y, cfg, C=chosen_c, n_features=vocab.size)
        else:
            model = train_svm_rff(
                X, y, cfg, C=args.C, gamma=args.gamma, D=args.rff_dim,
                n_features=vocab.size,
            )
        save_checkpoint(model, args.output, vocab=vocab)
    else:  # cnn
        if not args.embeddings:
            raise IlluminateError("--embeddings is required for the cnn model")
        table = load_embeddings(args.embeddings)
        X = np.stack(
            [
                embed_sequence(preprocess(p.text), table, args.max_len)
                for p in posts
            ]
        )
        model = train_cnn(X, y, cfg)
        save_checkpoint(
            model,
            args.output,
            embedding_fingerprint=_embedding_fingerprint(args.embeddings),
        )
    summary["checkpoint"] = str(args.output)
    _print_json(summary)
    return 0


def _pipeline_from_args(args) -> TextClassifier:
    model, vocab, _ = load_checkpoint(args.checkpoint)
    if vocab is not None:
        return TextClassifier(model=model, vocab=vocab)
    if not getattr(args, "embeddings", None):
        raise IlluminateError("checkpoint has no vocabulary; pass --embeddings for cnn")
    return TextClassifier(model=model, table=load_embeddings(args.embeddings))


def cmd_eval(args) -> int:
    ds = load_jsonl(args.data)
    posts = _partition_posts(args, ds)
    if not posts:
        raise IlluminateError("no evaluation posts selected")
    pipe = _pipeline_from_args(args)
    preds = [pipe.predict_text(p.text).label for p in posts]
    report = prf_report(preds, [p.label for p in posts])
    payload = report.as_dict()
    payload["n_eval"] = len(posts)
    _print_json(payload)
    if args.report_out:
        Path(args.report_out).write_text(json.dumps(payload, sort_keys=True))
    return 0


def cmd_explain(args) -> int:
    pipe = _pipeline_from_args(args)
    if args.text:
        text = args.text
    else:
        if not (args.data and args.id):
            raise IlluminateError("provide --text or both --data and --id")
        ds = load_jsonl(args.data)
        match = [p for p in ds.posts if p.id == args.id]
        if not match:
            raise IlluminateError(f"no post with id {args.id!r}")
        text = match[0].text
    doc = preprocess(text)
    result = lime_explain(
        pipe.p1, doc, n=args.samples, top_k=args.top_k, seed=args.seed
    )
    _print_json(result.as_dict())
    return 0


def cmd_diagnose(args) -> int:
    result: dict = {
        "label": None,
        "p1": None,
        "explanation": "",
        "keywords": [],
        "lime": None,
        "warnings": [],
    }
    classifier_label = None
    if args.engine in ("classifier", "both"):
        if not args.checkpoint:
            raise IlluminateError("engine includes the classifier; pass --checkpoint")
        pipe = _pipeline_from_args(args)
        pred = pipe.predict_text(args.text)
        classifier_label = "depressed" if pred.label == 1 else "not_depressed"
        result["label"] = classifier_label
        result["p1"] = pred.p1
        doc = preprocess(args.text)
        if args.lime and doc.tokens:
            result["lime"] = lime_explain(pipe.p1, doc, seed=args.seed).as_dict()
    if args.engine in ("llm", "both"):
        backend = _backend_from_args(args)
        bank = load_exemplar_bank(args.bank) if args.bank else _default_bank()
        bundle = build_diagnose_prompt(args.text, bank, args.shots)
        response = backend.complete(
            CompletionRequest(
                model_id=args.model_id, messages=tuple(bundle.to_chat_messages())
            )
        )
        diagnosis = parse_diagnosis(response.content)
        result["explanation"] = diagnosis.explanation
        result["keywords"] = diagnosis.keywords
        if args.engine == "llm":
            result["label"] = diagnosis.label
        elif classifier_label and classifier_label != diagnosis.label:
            result["warnings"].append("classifier and language model disagree")
    _print_json(result)
    return 0


def cmd_chat(args) -> int:
    backend = _backend_from_args(args)
    state = DialogueState()
    plan_shown = False
    print("illuminate chat; /quit to exit", flush=True)
    for line in sys.stdin:
        text = line.strip()
        if not text:
            continue
        if text == "/quit":
            break
        reply, state = next_turn(state, text, backend, model_id=args.model_id)
        print(f"[{state.stage}|{state.risk}] {reply}", flush=True)
        if state.stage == "support" and not plan_shown:
            plan = plan_treatment(
                " ".join(t for s, t in state.history if s == "user"),
                load_default_cbt_db(),
                PlanConfig(beam=2, depth=3, beta=0.0),
                load_default_cbt_table(),
            )
            print(json.dumps(plan.as_dict(), sort_keys=True), flush=True)
            plan_shown = True
    return 0


def cmd_serve(args) -> int:
    from .service import run

    run(args.config)
    return 0


def _load_bench_items(path: str) -> list[dict]:
    items = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            items.append(json.loads(line))
    return items


def _map_indexed(fn, items, jobs: int) -> list:
    """Apply fn over enumerate(items), order-stable regardless of jobs."""
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(fn, enumerate(items)))
    else:
        results = [fn(pair) for pair in enumerate(items)]
    results.sort(key=lambda pair: pair[0])
    return results


def _bench_rows_shots(args, items, model_ids) -> list[dict]:
    bank = load_exemplar_bank(args.bank) if args.bank else _default_bank()
    rows = []
    for model_id in model_ids:
        backend = _backend_from_args(args)

        def score_item(idx_item, k):
            idx, item = idx_item
            bundle = build_diagnose_prompt(item["text"], bank, k)
            response = backend.complete(
                CompletionRequest(
                    model_id=model_id, messages=tuple(bundle.to_chat_messages())
                )
            )
            label = parse_diagnosis(response.content).label
            return idx, int(label == "depressed")

        for k in (1, 2, 3, 4):
            scored = _map_indexed(lambda pair: score_item(pair, k), items, args.jobs)
            preds = [pred for _, pred in scored]
            f1 = prf_report(preds, [item["label"] for item in items]).f1
            rows.append(
                {
                    "model_id": model_id,
                    "axis": "shots",
                    "axis_value": k,
                    "metric": "f1",
                    "value": f1,
                }
            )
    return rows


def _bench_rows_fraction(args, items, model_ids) -> list[dict]:
    table = (
        load_embeddings(args.embeddings) if args.embeddings else load_default_cbt_table()
    )
    rows = []
    for model_id in model_ids:
        backend = _backend_from_args(args)

        def respond(idx_item):
            idx, item = idx_item
            request = build_turn_request(DialogueState(), item["text"], model_id)
            return idx, backend.complete(request).content

        for pct in (25, 50, 75, 100):
            subset = items[: max(1, round(len(items) * pct / 100))]
            replies = _map_indexed(respond, subset, args.jobs)
            sims, r1, r2, rl = [], [], [], []
            for (_, reply), item in zip(replies, subset):
                ref = item["reference"]
                sims.append(response_similarity(reply, ref, table))
                r1.append(rouge_text(reply, ref, "1").f1)
                r2.append(rouge_text(reply, ref, "2").f1)
                rl.append(rouge_text(reply, ref, "l").f1)
            for metric, values in (
                ("cosine", sims),
                ("rouge1_f1", r1),
                ("rouge2_f1", r2),
                ("rougeL_f1", rl),
            ):
                rows.append(
                    {
                        "model_id": model_id,
                        "axis": "fraction",
                        "axis_value": pct,
                        "metric": metric,
                        "value": float(np.mean(values)),
                    }
                )
    return rows


def cmd_bench(args) -> int:
    items = _load_bench_items(args.data)
    if not items:
        raise IlluminateError("benchmark fixture is empty")
    model_ids = [m.strip() for m in args.models.split(",") if m.strip()]
    if args.sweep == "shots":
        rows = _bench_rows_shots(args, items, model_ids)
    else:
        rows = _bench_rows_fraction(args, items, model_ids)
    for row in rows:
        if not 0.0 <= row["value"] <= 1.0:
            # cosine may drift below zero for dissimilar texts; clamp so
            # report consumers can rely on the documented range
            row["value"] = min(1.0, max(0.0, row["value"]))
    csv_path = Path(f"{args.out_prefix}.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["model_id", "axis", "axis_value", "metric", "value"]
        )
        writer.writeheader()
        writer.writerows(rows)
    Path(f"{args.out_prefix}.json").write_text(json.dumps(rows, sort_keys=True))
    _print_json({"rows": len(rows), "csv": str(csv_path)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="illuminate")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("ingest", help="validate a JSONL dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="write a stratified split manifest")
    p.add_argument("--input", required=True)
    p.add_argument("--manifest-out", required=True)
    p.add_argument("--train-frac", type=float, default=0.6)
    p.add_argument("--val-frac", type=float, default=0.2)
    p.add_argument("--test-frac", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("pseudolabel", help="admit confident teacher labels")
    p.add_argument("--labeled", required=True)
    p.add_argument("--unlabeled", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--tau", type=float, default=0.9)
    p.add_argument("--max-rounds", type=int, default=3)
    p.add_argument("--cap", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_pseudolabel)

    p = sub.add_parser("train", help="train a classifier checkpoint")
    p.add_argument("--model", choices=("logreg", "svm", "cnn"), required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--manifest")
    p.add_argument("--partition", default="train")
    p.add_argument("--output", required=True)
    p.add_argument("--cap", type=int, default=2000)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--rff-dim", type=int, default=512)
    p.add_argument("--max-len", type=int, default=400)
    p.add_argument("--embeddings")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--grid-c", help="comma list of C values for cross-validation")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a checkpoint on a partition")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--manifest")
    p.add_argument("--partition", default="test")
    p.add_argument("--embeddings")
    p.add_argument("--report-out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("explain", help="local surrogate explanation for one text")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--text")
    p.add_argument("--data")
    p.add_argument("--id")
    p.add_argument("--embeddings")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("diagnose", help="diagnose one post")
    p.add_argument("--text", required=True)
    p.add_argument("--shots", type=int, default=3)
    p.add_argument("--engine", choices=("classifier", "llm", "both"), default="both")
    p.add_argument("--checkpoint")
    p.add_argument("--embeddings")
    p.add_argument("--bank")
    p.add_argument("--mock-script")
    p.add_argument("--mock-default")
    p.add_argument("--backend-config")
    p.add_argument("--model-id", default="illuminate-default")
    p.add_argument("--lime", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("chat", help="interactive dialogue loop on stdin")
    p.add_argument("--mock-script")
    p.add_argument("--mock-default")
    p.add_argument("--backend-config")
    p.add_argument("--model-id", default="illuminate-default")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("bench", help="benchmark sweeps over shots or test fraction")
    p.add_argument("--sweep", choices=("shots", "fraction"), required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--models", default="illuminate-default")
    p.add_argument("--bank")
    p.add_argument("--embeddings")
    p.add_argument("--mock-script")
    p.add_argument("--mock-default")
    p.add_argument("--backend-config")
    p.add_argument("--out-prefix", default="bench")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args) or 0
    except (IlluminateError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
