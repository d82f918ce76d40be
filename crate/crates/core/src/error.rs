/// A vector or matrix had the wrong length for the operation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("dimension mismatch in {context}: expected {expected}, found {found}")]
pub struct DimensionError {
    pub context: String,
    pub expected: usize,
    pub found: usize,
}

impl DimensionError {
    pub fn check(context: &str, expected: usize, found: usize) -> Result<(), DimensionError> {
        if expected == found {
            Ok(())
        } else {
            Err(DimensionError {
                context: context.to_string(),
                expected,
                found,
            })
        }
    }
}
