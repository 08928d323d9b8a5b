//! DURel-style annotation: passage sampling, blinded pair schedules, an
//! event-sourced rating log, inverted-scale scores, rater agreement and a
//! chat-completion rater.

mod llm;
mod passage;
mod schedule;
mod scores;
mod session;

pub use llm::{
    build_prompt, llm_rate, parse_rating, request_body, run_llm_session, ChatClient, Exchange, HttpChatClient,
    LlmConfig, LlmOutcome, LlmRunSummary, StubClient, DEFAULT_API_KEY_ENV, DUREL_PROMPT,
};
pub use passage::{
    caps_ratio, find_target, passes_rules, sample_passages, top2_letter_ratio, type_token_ratio, Passage,
    SamplingRules, WINDOW_CHARS,
};
pub use schedule::{
    build_session, Composition, Pair, PairKind, Schedule, TargetPassages, LR_PAIRS, PASSAGES_PER_SIDE,
    SAME_SIDE_PAIRS, USES_PER_PASSAGE,
};
pub use scores::{
    agreement, scores_tsv, session_agreement, session_scores, Agreement, TargetScores, SCORES_TSV_HEADER,
};
pub use session::{
    read_events, session_dir, Event, PairView, Progress, Rating, Session, SessionState, EVENTS_FILE, RATING_MAX,
    RATING_MIN, SCHEDULE_FILE,
};
