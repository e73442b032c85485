"""Dataset model, JSONL ingestion, stratified splitting, pseudo-labeling."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Protocol, Sequence

from .classify import TrainConfig, predict, train_logreg
from .errors import IlluminateError
from .textprep import fit_tfidf, preprocess, tfidf_transform

SOURCES = ("clinical_transcript", "forum", "synthetic")
PARTITIONS = ("train", "val", "test")

__all__ = [
    "Post",
    "Dataset",
    "SplitSpec",
    "PseudoLabelConfig",
    "Teacher",
    "TfidfLogRegTeacher",
    "load_jsonl",
    "write_jsonl",
    "stratified_split",
    "write_split_manifest",
    "read_split_manifest",
    "pseudo_label",
    "MalformedLine",
    "DuplicateId",
    "UnlabeledPost",
    "ClassTooSmall",
]


class MalformedLine(IlluminateError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateId(IlluminateError):
    pass


class UnlabeledPost(IlluminateError):
    pass


class ClassTooSmall(IlluminateError):
    pass


@dataclass(frozen=True)
class Post:
    """One text unit; label 1 means depressed, 0 means not depressed."""

    id: str
    text: str
    label: int | None = None
    source: str = "forum"
    author_id: str | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"post {self.id!r} has empty text")
        if self.label is not None and self.label not in (0, 1):
            raise ValueError(f"post {self.id!r} label must be 0 or 1")
        if self.source not in SOURCES:
            raise ValueError(f"post {self.id!r} has unknown source {self.source!r}")


@dataclass
class Dataset:
    posts: list[Post]
    split: dict[str, str] | None = None

    def __post_init__(self):
        ids = [p.id for p in self.posts]
        if len(ids) != len(set(ids)):
            seen, dup = set(), None
            for i in ids:
                if i in seen:
                    dup = i
                    break
                seen.add(i)
            raise DuplicateId(f"duplicate post id {dup!r}")
        if self.split:
            known = set(ids)
            for pid, part in self.split.items():
                if pid not in known:
                    raise ValueError(f"split references unknown id {pid!r}")
                if part not in PARTITIONS:
                    raise ValueError(f"unknown partition {part!r} for id {pid!r}")

    def partition(self, name: str) -> list[Post]:
        if self.split is None:
            return []
        return [p for p in self.posts if self.split.get(p.id) == name]

    def labeled(self) -> list[Post]:
        return [p for p in self.posts if p.label is not None]

    def unlabeled(self) -> list[Post]:
        return [p for p in self.posts if p.label is None]


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.6
    val_frac: float = 0.2
    test_frac: float = 0.2
    seed: int = 0

    def __post_init__(self):
        for frac in (self.train_frac, self.val_frac, self.test_frac):
            if not 0.0 < frac < 1.0:
                raise ValueError("split fractions must lie in (0, 1)")
        total = self.train_frac + self.val_frac + self.test_frac
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"split fractions sum to {total}, expected 1.0")


@dataclass(frozen=True)
class PseudoLabelConfig:
    confidence_threshold: float = 0.9
    max_rounds: int = 3

    def __post_init__(self):
        if not 0.5 < self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold must lie in (0.5, 1.0]")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")


def _post_from_record(record: dict, line_no: int) -> Post:
    if "id" not in record or "text" not in record:
        raise MalformedLine(line_no, "record must contain 'id' and 'text'")
    if not isinstance(record["text"], str):
        raise MalformedLine(line_no, "'text' must be a string")
    label = record.get("label")
    if label is not None and label in (0, 1):
        label = int(label)
    try:
        return Post(
            id=str(record["id"]),
            text=record["text"],
            label=label,
            source=record.get("source", "forum"),
            author_id=record.get("author_id"),
        )
    except (ValueError, TypeError) as exc:
        raise MalformedLine(line_no, str(exc)) from exc


def load_jsonl(path: str | Path) -> Dataset:
    """Read one post per JSON line; blank lines are skipped."""
    posts: list[Post] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise MalformedLine(line_no, "line is not a JSON object")
            post = _post_from_record(record, line_no)
            if post.id in seen:
                raise DuplicateId(f"duplicate post id {post.id!r} at line {line_no}")
            seen.add(post.id)
            posts.append(post)
    return Dataset(posts=posts)


def write_jsonl(posts: Sequence[Post], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in posts:
            record: dict = {"id": p.id, "text": p.text}
            if p.label is not None:
                record["label"] = p.label
            record["source"] = p.source
            if p.author_id is not None:
                record["author_id"] = p.author_id
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def stratified_split(ds: Dataset, spec: SplitSpec) -> Dataset:
    """Assign train/val/test per class under a seeded shuffle.

    Validation and test take floor(frac * n) items per class; whatever
    remains lands in train.
    """
    by_class: dict[int, list[Post]] = {}
    for post in ds.posts:
        if post.label is None:
            raise UnlabeledPost(f"post {post.id!r} has no label")
        by_class.setdefault(post.label, []).append(post)
    for cls, members in sorted(by_class.items()):
        if len(members) < 3:
            raise ClassTooSmall(f"class {cls} has only {len(members)} posts")
    rng = random.Random(spec.seed)
    split: dict[str, str] = {}
    for cls in sorted(by_class):
        members = list(by_class[cls])
        rng.shuffle(members)
        n = len(members)
        n_val = int(spec.val_frac * n)
        n_test = int(spec.test_frac * n)
        n_train = n - n_val - n_test
        for post in members[:n_train]:
            split[post.id] = "train"
        for post in members[n_train : n_train + n_val]:
            split[post.id] = "val"
        for post in members[n_train + n_val :]:
            split[post.id] = "test"
    return Dataset(posts=list(ds.posts), split=split)


def write_split_manifest(ds: Dataset, path: str | Path) -> None:
    if ds.split is None:
        raise ValueError("dataset has no split to write")
    with open(path, "w", encoding="utf-8") as fh:
        for post in ds.posts:
            fh.write(
                json.dumps({"id": post.id, "partition": ds.split[post.id]}) + "\n"
            )


def read_split_manifest(path: str | Path) -> dict[str, str]:
    split: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                record = json.loads(line)
                split[record["id"]] = record["partition"]
    return split


class Teacher(Protocol):
    """Probability-producing classifier that can absorb new labeled posts."""

    def predict_p1(self, texts: Sequence[str]) -> list[float]: ...

    def retrain(self, admitted: Sequence[Post]) -> None: ...


class TfidfLogRegTeacher:
    """Default pseudo-labeling teacher: logistic regression over tf-idf."""

    def __init__(
        self,
        seed_posts: Sequence[Post],
        cap: int = 2000,
        C: float = 1000.0,
        train_cfg: TrainConfig | None = None,
    ):
        self.seed_posts = list(seed_posts)
        self.cap = cap
        self.C = C
        # long low-regularization schedule so a separable seed set yields
        # confident probabilities, not just correct labels
        self.train_cfg = train_cfg or TrainConfig(epochs=400, learning_rate=0.3)
        self._fit(self.seed_posts)

    def _fit(self, posts: Sequence[Post]) -> None:
        docs = [preprocess(p.text) for p in posts]
        self.vocab = fit_tfidf(docs, cap=self.cap)
        X = [tfidf_transform(self.vocab, d) for d in docs]
        y = [p.label for p in posts]
        self.model = train_logreg(
            X, y, self.train_cfg, C=self.C, n_features=self.vocab.size
        )

    def predict_p1(self, texts: Sequence[str]) -> list[float]:
        out = []
        for text in texts:
            vec = tfidf_transform(self.vocab, preprocess(text))
            out.append(predict(self.model, vec).p1)
        return out

    def retrain(self, admitted: Sequence[Post]) -> None:
        self._fit(self.seed_posts + list(admitted))


def pseudo_label(
    teacher: Teacher, unlabeled: Sequence[Post], cfg: PseudoLabelConfig
) -> list[Post]:
    """Admit confident teacher predictions as labels, up to max_rounds.

    Posts that already carry a label are never touched.  The loop stops
    early the first time a round admits nothing.
    """
    remaining = [p for p in unlabeled if p.label is None]
    admitted: list[Post] = []
    tau = cfg.confidence_threshold
    for round_no in range(cfg.max_rounds):
        if not remaining:
            break
        probs = teacher.predict_p1([p.text for p in remaining])
        new_posts: list[Post] = []
        still: list[Post] = []
        for post, p1 in zip(remaining, probs):
            if max(p1, 1.0 - p1) >= tau:
                new_posts.append(replace(post, label=int(p1 >= 0.5)))
            else:
                still.append(post)
        if not new_posts:
            break
        admitted.extend(new_posts)
        remaining = still
        if remaining and round_no + 1 < cfg.max_rounds:
            teacher.retrain(admitted)
    return admitted
