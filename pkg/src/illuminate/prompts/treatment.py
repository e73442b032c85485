"""Beam-search treatment planning over the CBT module database.

Each database module is a candidate node; a step's score blends embedding
similarity between the case summary and the node's application text with
an optional model vote.  Scores are renormalized to [0, 1] and ties keep
database order, so planning is deterministic given the inputs.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..errors import IlluminateError
from ..llmclient import ChatMessage, CompletionRequest
from ..metrics import response_similarity
from ..textprep import EmbeddingTable, load_embeddings

__all__ = [
    "CbtNode",
    "PlanConfig",
    "PlanStep",
    "TreatmentPlan",
    "plan_treatment",
    "load_cbt_db",
    "load_default_cbt_db",
    "load_default_cbt_table",
    "EmptyDatabase",
]


class EmptyDatabase(IlluminateError):
    pass


@dataclass(frozen=True)
class CbtNode:
    name: str
    objective: str
    techniques: tuple[str, ...]
    application: str
    prompt_example: str
    key_steps: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "techniques", tuple(self.techniques))
        object.__setattr__(self, "key_steps", tuple(self.key_steps))
        for name, value in (
            ("name", self.name),
            ("objective", self.objective),
            ("application", self.application),
            ("prompt_example", self.prompt_example),
        ):
            if not value or not value.strip():
                raise ValueError(f"CbtNode field {name!r} must be non-empty")
        if not self.techniques or not self.key_steps:
            raise ValueError("CbtNode techniques and key_steps must be non-empty")


@dataclass(frozen=True)
class PlanConfig:
    beam: int = 2
    depth: int = 3
    alpha: float = 1.0  # weight on embedding similarity
    beta: float = 1.0  # weight on the model vote

    def __post_init__(self):
        if self.beam < 1 or self.depth < 1:
            raise ValueError("beam and depth must be >= 1")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")


@dataclass(frozen=True)
class PlanStep:
    node_name: str
    rationale: str
    prompt: str


@dataclass
class TreatmentPlan:
    steps: list[PlanStep]
    depth: int
    scores: list[float]

    def as_dict(self) -> dict:
        return {
            "depth": self.depth,
            "steps": [
                {
                    "node": s.node_name,
                    "rationale": s.rationale,
                    "prompt": s.prompt,
                    "score": score,
                }
                for s, score in zip(self.steps, self.scores)
            ],
        }


def load_cbt_db(path: str | Path) -> list[CbtNode]:
    records = json.loads(Path(path).read_text(encoding="utf-8"))
    return [CbtNode(**record) for record in records]


def load_default_cbt_db() -> list[CbtNode]:
    text = resources.files("illuminate").joinpath("data/cbt_nodes.json").read_text()
    return [CbtNode(**record) for record in json.loads(text)]


def load_default_cbt_table() -> EmbeddingTable:
    with resources.as_file(
        resources.files("illuminate").joinpath("data/cbt_embeddings.txt")
    ) as path:
        return load_embeddings(path)


_NUMBER = re.compile(r"[-+]?\d*\.?\d+")


def _vote(llm, case_summary: str, node: CbtNode, model_id: str) -> float:
    request = CompletionRequest(
        model_id=model_id,
        messages=(
            ChatMessage(
                role="system",
                content=(
                    "You rate how well a CBT module fits a case summary. "
                    "Reply with one number between 0 and 1."
                ),
            ),
            ChatMessage(
                role="user",
                content=(
                    f"Case summary: {case_summary}\n"
                    f"Candidate module: {node.name}\n"
                    f"Module application: {node.application}\n"
                    "Fit score (0 to 1):"
                ),
            ),
        ),
    )
    reply = llm.complete(request).content
    match = _NUMBER.search(reply)
    if match is None:
        return 0.0
    return min(1.0, max(0.0, float(match.group(0))))


def plan_treatment(
    case_summary: str,
    db: list[CbtNode],
    cfg: PlanConfig,
    table: EmbeddingTable,
    llm=None,
    model_id: str = "mock",
) -> TreatmentPlan:
    """Beam-search an ordered, non-repeating sequence of CBT modules.

    With no backend (or beta = 0) the plan depends only on the embedding
    similarities, so it is fully reproducible offline.
    """
    if not db:
        raise EmptyDatabase("CBT database is empty")

    use_votes = llm is not None and cfg.beta > 0
    denom = 2.0 * cfg.alpha + cfg.beta
    scores: dict[int, float] = {}
    sims: dict[int, float] = {}
    for i, node in enumerate(db):
        sim = response_similarity(case_summary, node.application, table)
        vote = _vote(llm, case_summary, node, model_id) if use_votes else 0.0
        raw = cfg.alpha * sim + cfg.beta * vote
        sims[i] = sim
        scores[i] = (raw + cfg.alpha) / denom if denom > 0 else 0.5

    # node scores are prefix-independent, so the beam carries cumulative
    # score plus the used-node set
    beams: list[tuple[float, tuple[int, ...]]] = [(0.0, ())]
    depth = min(cfg.depth, len(db))
    for _ in range(depth):
        candidates: list[tuple[float, tuple[int, ...]]] = []
        for cum, seq in beams:
            used = set(seq)
            for i in range(len(db)):
                if i not in used:
                    candidates.append((cum + scores[i], seq + (i,)))
        candidates.sort(key=lambda item: -item[0])  # stable: db order wins ties
        beams = candidates[: cfg.beam]

    best_seq = beams[0][1]
    steps = []
    step_scores = []
    for i in best_seq:
        node = db[i]
        steps.append(
            PlanStep(
                node_name=node.name,
                rationale=(
                    f"Case themes align with this module "
                    f"(similarity {sims[i]:.3f}); objective: {node.objective}"
                ),
                prompt=node.prompt_example,
            )
        )
        step_scores.append(scores[i])
    return TreatmentPlan(steps=steps, depth=cfg.depth, scores=step_scores)
