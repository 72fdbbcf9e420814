/// One entry that a corrector rewrote. `new` is always the recomputed
/// `A(row,*) . B(*,col)` and differs from `old`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Correction<E> {
    pub row: usize,
    pub col: usize,
    pub old: E,
    pub new: E,
}

/// What a corrector did, plus instrumentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorReport<E> {
    pub corrections: Vec<Correction<E>>,
    /// Ring multiplications charged on the calling thread during the run.
    pub ring_mults: u64,
    pub random_bits: u64,
    /// Outer iterations (rounds) performed.
    pub iterations: usize,
    /// Abandoned attempts: discarded guesses, failed decodes, failed gates.
    pub restarts: usize,
    /// Successive error-count guesses, for correctors that guess.
    pub guesses: Vec<usize>,
}

impl<E> Default for ErrorReport<E> {
    fn default() -> Self {
        Self {
            corrections: Vec::new(),
            ring_mults: 0,
            random_bits: 0,
            iterations: 0,
            restarts: 0,
            guesses: Vec::new(),
        }
    }
}

impl<E> ErrorReport<E> {
    pub fn num_corrections(&self) -> usize {
        self.corrections.len()
    }
}
