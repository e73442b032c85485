"""Prompt managers: few-shot diagnosis, staged dialogue, treatment planning."""
from .diagnose import (
    Diagnosis,
    Exemplar,
    KTooLarge,
    ParseError,
    PromptBundle,
    SYSTEM_PREAMBLE,
    build_diagnose_prompt,
    load_exemplar_bank,
    parse_diagnosis,
    render_exemplar_answer,
)
from .dialogue import (
    CRISIS_MESSAGE,
    DialogueState,
    RISKS,
    STAGES,
    SUPPORT_AFTER_EXCHANGES,
    assess_risk,
    build_turn_request,
    next_turn,
)
from .treatment import (
    CbtNode,
    EmptyDatabase,
    PlanConfig,
    PlanStep,
    TreatmentPlan,
    load_cbt_db,
    load_default_cbt_db,
    load_default_cbt_table,
    plan_treatment,
)

__all__ = [
    "CRISIS_MESSAGE",
    "CbtNode",
    "Diagnosis",
    "DialogueState",
    "EmptyDatabase",
    "Exemplar",
    "KTooLarge",
    "ParseError",
    "PlanConfig",
    "PlanStep",
    "PromptBundle",
    "RISKS",
    "STAGES",
    "SUPPORT_AFTER_EXCHANGES",
    "SYSTEM_PREAMBLE",
    "TreatmentPlan",
    "assess_risk",
    "build_diagnose_prompt",
    "build_turn_request",
    "load_cbt_db",
    "load_default_cbt_db",
    "load_default_cbt_table",
    "load_exemplar_bank",
    "next_turn",
    "parse_diagnosis",
    "plan_treatment",
    "render_exemplar_answer",
]
