"""Empathetic dialogue manager with staged turns and a lexicon safety gate.

Stages move understand -> relate after the first exchange, then follow the
model's self-tagged move between clarify and reflect, and settle on support
after six exchanges.  Crisis detection runs before any model call and is
absorbing.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from ..llmclient import ChatMessage, CompletionRequest
from ..textprep import preprocess

logger = logging.getLogger(__name__)

STAGES = ("understand", "relate", "clarify", "reflect", "support")
RISKS = ("none", "elevated", "crisis")
SUPPORT_AFTER_EXCHANGES = 6

__all__ = [
    "DialogueState",
    "next_turn",
    "assess_risk",
    "CRISIS_MESSAGE",
    "STAGES",
    "RISKS",
    "SUPPORT_AFTER_EXCHANGES",
]

CRISIS_MESSAGE = (
    "I'm really glad you told me, and I'm concerned about your safety. "
    "I'm not able to provide crisis care, but you deserve immediate "
    "support from a real person. If you are in danger right now, please "
    "call your local emergency number. You can also reach a trained "
    "crisis counselor at any time (in the US, call or text 988; "
    "elsewhere, your local crisis line). Would you consider reaching out "
    "to one of them, or to someone you trust, right now?"
)

COT_SCAFFOLD = (
    "You are Illuminate AI, a supportive companion for people working "
    "through depression. You are not a clinician and never diagnose or "
    "prescribe. Before answering, reason through these steps in order:\n"
    "1. Understand the emotions and the context in the person's message.\n"
    "2. Relate what they said to what you already know about their "
    "state from the conversation so far.\n"
    "3. Choose exactly one conversational move: ask a clarifying "
    "question (clarify) or paraphrase and reflect their feelings back "
    "(paraphrase_reflect).\n"
    "Keep a warm, empathetic, non-judgmental tone. Begin your reply with "
    "the tag [clarify] or [reflect] to mark the move you chose, then "
    "write the reply itself."
)

FEWSHOT_CLARIFICATION = (
    "Example of clarification:\n"
    "[User] I just do not feel like trying anymore.\n"
    "[Illuminate AI] Tell me more about what you mean.\n"
    "[User] I just feel like giving up.\n"
    "[Illuminate AI] Do you mean giving up on your goal to complete "
    "college; or are you referring to something different, like giving "
    "up on life and possibly harming yourself?\n"
    "[User] I am not referring to suicide if that is what you mean, but "
    "I am feeling really depressed. Each day seems like such a "
    "struggle, and I often just feel like staying in bed. When I said "
    '"give up," I guess I was referring to not wanting to face all the '
    "struggles I face in life - my school work, financial problems, "
    "relationship problems, etc."
)

FEWSHOT_REFLECTION = (
    "Example of paraphrasing and reflection:\n"
    "[User] Since my fiance's death, I feel like every day is a "
    "struggle, and I often question whether my life will ever get "
    "better. I just miss him so much that I think about him "
    "constantly. I don't know what to do, but the pain is getting to "
    "be too much.\n"
    "[Illuminate AI] You are really struggling to feel better, and much "
    "of your pain comes from the grief and loss you feel from losing "
    "your fiance. You may even be questioning whether or not this pain "
    "will subside because it is getting unmanageable."
)


@dataclass
class DialogueState:
    stage: str = "understand"
    history: list[tuple[str, str]] = field(default_factory=list)
    risk: str = "none"

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
        if self.risk not in RISKS:
            raise ValueError(f"unknown risk {self.risk!r}")

    @property
    def exchanges(self) -> int:
        return sum(1 for speaker, _ in self.history if speaker == "assistant")


def _load_lexicon(name: str, path: str | Path | None = None) -> list[list[str]]:
    if path is None:
        text = resources.files("illuminate").joinpath(f"data/{name}").read_text()
    else:
        text = Path(path).read_text(encoding="utf-8")
    phrases = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        tokens = preprocess(line, stopwords=False, stemming=True).tokens
        if tokens:
            phrases.append(tokens)
    return phrases


_CRISIS_PHRASES: list[list[str]] | None = None
_ELEVATED_PHRASES: list[list[str]] | None = None


def _lexicons() -> tuple[list[list[str]], list[list[str]]]:
    global _CRISIS_PHRASES, _ELEVATED_PHRASES
    if _CRISIS_PHRASES is None:
        _CRISIS_PHRASES = _load_lexicon("crisis_lexicon.txt")
        _ELEVATED_PHRASES = _load_lexicon("elevated_lexicon.txt")
    return _CRISIS_PHRASES, _ELEVATED_PHRASES


def _contains_phrase(tokens: list[str], phrase: list[str]) -> bool:
    n = len(phrase)
    return any(tokens[i : i + n] == phrase for i in range(len(tokens) - n + 1))


def assess_risk(text: str) -> str:
    """Purely lexicon-based risk triage; no model involved.

    Both the text and the lexicon phrases go through the same stemming
    pipeline (stop words kept) so inflected variants still match.
    """
    tokens = preprocess(text, stopwords=False, stemming=True).tokens
    if not tokens:
        return "none"
    crisis, elevated = _lexicons()
    if any(_contains_phrase(tokens, p) for p in crisis):
        return "crisis"
    if any(_contains_phrase(tokens, p) for p in elevated):
        return "elevated"
    return "none"


_MOVE_TAG = re.compile(r"\[(clarify|paraphrase[_ ]?reflect|reflect)\]", re.IGNORECASE)


def _extract_move(reply: str) -> tuple[str | None, str]:
    match = _MOVE_TAG.search(reply)
    if match is None:
        return None, reply.strip()
    move = "clarify" if match.group(1).lower() == "clarify" else "reflect"
    cleaned = (reply[: match.start()] + reply[match.end() :]).strip()
    return move, cleaned


def _next_stage(state: DialogueState, move: str | None, exchanges_after: int) -> str:
    if exchanges_after >= SUPPORT_AFTER_EXCHANGES:
        return "support"
    if state.stage == "understand":
        return "relate"
    if move == "clarify":
        return "clarify"
    if move == "reflect":
        return "reflect"
    logger.warning("model reply carried no move tag; stage stays %r", state.stage)
    return state.stage


def build_turn_request(
    state: DialogueState, user_msg: str, model_id: str
) -> CompletionRequest:
    system = "\n\n".join([COT_SCAFFOLD, FEWSHOT_CLARIFICATION, FEWSHOT_REFLECTION])
    messages = [ChatMessage(role="system", content=system)]
    for speaker, text in state.history:
        messages.append(ChatMessage(role=speaker, content=text))
    messages.append(ChatMessage(role="user", content=user_msg))
    return CompletionRequest(model_id=model_id, messages=tuple(messages))


def next_turn(
    state: DialogueState, user_msg: str, llm, model_id: str = "mock"
) -> tuple[str, DialogueState]:
    """Run one exchange: safety gate, model call, stage transition.

    Returns the assistant reply and the successor state; the input state
    is never mutated.
    """
    if not user_msg or not user_msg.strip():
        raise ValueError("user_msg must be non-empty")

    turn_risk = assess_risk(user_msg)
    if state.risk == "crisis" or turn_risk == "crisis":
        history = state.history + [("user", user_msg), ("assistant", CRISIS_MESSAGE)]
        return CRISIS_MESSAGE, replace(state, history=history, risk="crisis")

    risk = "elevated" if turn_risk == "elevated" or state.risk == "elevated" else "none"

    response = llm.complete(build_turn_request(state, user_msg, model_id))
    move, reply = _extract_move(response.content)
    exchanges_after = state.exchanges + 1
    stage = _next_stage(state, move, exchanges_after)
    history = state.history + [("user", user_msg), ("assistant", reply)]
    return reply, DialogueState(stage=stage, history=history, risk=risk)
