//! Acceptance criteria for `fre-dombi`; the checks live in `tests/acceptance.rs`.
