//! Multiply-add counter used to check the linear-in-`m` work claim independently of wall-clock time.
//!
//! The counter is thread-local: every kernel adds its multiply-add count to the counter of the
//! thread it runs on. Measurements are therefore exact for sequential solves only.

use std::cell::Cell;

thread_local! {
    static MULTIPLY_ADDS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub(crate) fn record(count: usize) {
    MULTIPLY_ADDS.with(|c| c.set(c.get().wrapping_add(count as u64)));
}

/// Current value of this thread's counter.
pub fn multiply_adds() -> u64 {
    MULTIPLY_ADDS.with(Cell::get)
}

pub fn reset() {
    MULTIPLY_ADDS.with(|c| c.set(0));
}

/// Runs `f` and returns its result with the number of multiply-adds it performed on this thread.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let start = multiply_adds();
    let out = f();
    (out, multiply_adds().wrapping_sub(start))
}
