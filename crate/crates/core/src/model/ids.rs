use std::sync::atomic::{AtomicU64, Ordering};

/// Source of entity identities.
///
/// Random mode yields lowercase hyphenated v4 UUIDs. Sequential mode yields
/// `e-0001`, `e-0002`, ... so that repeated runs produce identical output.
#[derive(Debug)]
pub enum IdGenerator {
    Random,
    Sequential(AtomicU64),
}

impl IdGenerator {
    pub fn random() -> Self {
        IdGenerator::Random
    }

    pub fn sequential() -> Self {
        IdGenerator::Sequential(AtomicU64::new(0))
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, IdGenerator::Sequential(_))
    }

    pub fn next_id(&self) -> String {
        match self {
            IdGenerator::Random => uuid::Uuid::new_v4().hyphenated().to_string(),
            IdGenerator::Sequential(counter) => {
                let n = counter.fetch_add(1, Ordering::SeqCst) + 1;
                format!("e-{n:04}")
            }
        }
    }
}

impl Default for IdGenerator {
    fn default() -> Self {
        Self::random()
    }
}
