"""Few-shot diagnosis prompt builder and response parser."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import IlluminateError
from ..llmclient import ChatMessage

__all__ = [
    "Exemplar",
    "PromptBundle",
    "Diagnosis",
    "build_diagnose_prompt",
    "parse_diagnosis",
    "render_exemplar_answer",
    "load_exemplar_bank",
    "KTooLarge",
    "ParseError",
]


class KTooLarge(IlluminateError):
    pass


class ParseError(IlluminateError):
    pass


SYSTEM_PREAMBLE = (
    "You are an assistant trained in non-clinical text analysis based on the "
    "Diagnostic and Statistical Manual of Mental Disorders, Fifth Edition "
    "(DSM-5). Your role involves examining written posts, identifying "
    "potential signs of depression, and providing explanations based on "
    "DSM-5 criteria.\n"
    "\n"
    "Structure of Each Example:\n"
    "Task: Read and analyze posts to determine the presence of depressive "
    "symptoms as defined by DSM-5.\n"
    "Choices: [A. Depressed B. Not Depressed]\n"
    "Posts: [Text from the post]\n"
    "Answer: [A/B based on analysis]\n"
    "Explanation: Provide a concise and scientific rationale for your "
    "decision, citing specific DSM-5 criteria.\n"
    "Keywords: List keywords or phrases from the post that are indicative "
    "of depression."
)

_BLOCK_HEADER = (
    "Task: Read and analyze posts to determine the presence of depressive "
    "symptoms as defined by DSM-5.\n"
    "Choices: [A. Depressed B. Not Depressed]\n"
)


@dataclass(frozen=True)
class Exemplar:
    post: str
    answer: str  # "A" (depressed) or "B" (not depressed)
    explanation: str
    keywords: tuple[str, ...] = ()

    def __post_init__(self):
        if self.answer not in ("A", "B"):
            raise ValueError(f"answer must be 'A' or 'B', got {self.answer!r}")
        if self.answer == "A" and not self.keywords:
            raise ValueError("depressed exemplars must carry keywords")
        object.__setattr__(self, "keywords", tuple(self.keywords))


@dataclass
class PromptBundle:
    system: str
    messages: list[tuple[str, str]] = field(default_factory=list)

    def to_chat_messages(self, system_role: bool = True) -> list[ChatMessage]:
        out = [ChatMessage(role="system", content=self.system)] if system_role else []
        out.extend(ChatMessage(role=r, content=c) for r, c in self.messages)
        return out

    def render_text(self) -> str:
        """Canonical flat rendering, used for golden-file comparisons."""
        parts = [f"[system]\n{self.system}"]
        parts.extend(f"[{role}]\n{content}" for role, content in self.messages)
        return "\n\n".join(parts) + "\n"


@dataclass
class Diagnosis:
    label: str  # "depressed" or "not_depressed"
    explanation: str
    keywords: list[str]
    raw: str
    explanation_missing: bool = False


def render_exemplar_answer(exemplar: Exemplar) -> str:
    return (
        f"Answer: {exemplar.answer}\n"
        f"Explanation: {exemplar.explanation}\n"
        f"Keywords: {', '.join(exemplar.keywords)}"
    )


def _exemplar_block(exemplar: Exemplar) -> str:
    return (
        _BLOCK_HEADER + f"Posts: {exemplar.post}\n" + render_exemplar_answer(exemplar)
    )


def build_diagnose_prompt(post: str, bank: list[Exemplar], k: int) -> PromptBundle:
    """Prefix the target post with the first k bank exemplars."""
    if k < 0 or k > len(bank):
        raise KTooLarge(f"k={k} outside [0, {len(bank)}]")
    blocks = [_exemplar_block(e) for e in bank[:k]]
    blocks.append(_BLOCK_HEADER + f"Posts: {post}\n" + "Answer:")
    return PromptBundle(system=SYSTEM_PREAMBLE, messages=[("user", "\n\n".join(blocks))])


_ANSWER_TAG = re.compile(r"answer\s*[:\-]\s*\[?\(?\s*([ab])\b", re.IGNORECASE)
_ANSWER_CHOICE = re.compile(
    r"\b([ab])\s*[\.\):]\s*(not\s+depressed|depressed)", re.IGNORECASE
)
_EXPLANATION = re.compile(
    r"explanation\s*:\s*(.*?)(?=\s*keywords\s*:|\Z)", re.IGNORECASE | re.DOTALL
)
_KEYWORDS = re.compile(r"keywords\s*:\s*(.*)", re.IGNORECASE | re.DOTALL)


def parse_diagnosis(text: str) -> Diagnosis:
    """Extract the A/B verdict, explanation, and keyword list.

    A missing explanation is tolerated (flagged); a missing answer token
    is a ParseError, never silently defaulted.
    """
    match = _ANSWER_TAG.search(text)
    if match is None:
        match = _ANSWER_CHOICE.search(text)
    if match is None:
        raise ParseError(f"no answer token found in {text[:80]!r}")
    label = "depressed" if match.group(1).lower() == "a" else "not_depressed"

    exp_match = _EXPLANATION.search(text)
    explanation = exp_match.group(1).strip() if exp_match else ""

    kw_match = _KEYWORDS.search(text)
    keywords: list[str] = []
    if kw_match:
        keywords = [k.strip() for k in kw_match.group(1).split(",")]
        keywords = [k for k in keywords if k]
    return Diagnosis(
        label=label,
        explanation=explanation,
        keywords=keywords,
        raw=text,
        explanation_missing=exp_match is None,
    )


def load_exemplar_bank(path: str | Path) -> list[Exemplar]:
    bank: list[Exemplar] = []
    for line_no, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            bank.append(
                Exemplar(
                    post=record["post"],
                    answer=record["answer"],
                    explanation=record["explanation"],
                    keywords=tuple(record.get("keywords", [])),
                )
            )
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            raise IlluminateError(f"bad exemplar at line {line_no}: {exc}") from exc
    return bank
