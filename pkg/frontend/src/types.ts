// Wire types for the service JSON API, mirrored field-for-field.

export interface LimeToken {
  token: string;
  weight: number;
}

export interface LimeExplanation {
  tokens: LimeToken[];
  intercept: number;
  model_p1: number;
  local_r2: number;
}

export interface DiagnoseResult {
  label: string | null;
  p1: number | null;
  explanation: string;
  keywords: string[];
  lime: LimeExplanation | null;
  warnings: string[];
}

export interface PlanStep {
  node: string;
  rationale: string;
  prompt: string;
  score: number;
}

export interface TreatmentPlan {
  depth: number;
  steps: PlanStep[];
}

export interface MessageReply {
  reply: string;
  stage: string;
  risk: string;
  plan?: TreatmentPlan;
}

export interface SessionView {
  session_id: string;
  stage: string;
  risk: string;
  history: { speaker: string; text: string }[];
  plan: TreatmentPlan | null;
}

// Client-side view state.

export interface ChatMessageView {
  speaker: "user" | "assistant";
  text: string;
  stage: string;
  risk: string;
}

export interface ChatViewState {
  sessionId: string | null;
  messages: ChatMessageView[];
  pending: boolean;
  plan: TreatmentPlan | null;
  risk: string;
  error: string | null;
}

export interface DiagnoseViewState {
  input: string;
  result: DiagnoseResult | null;
  heatmap: Record<string, number>;
}
