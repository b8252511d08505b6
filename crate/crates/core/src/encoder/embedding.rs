use super::EncoderError;

/// Fixed-length latent vector produced by one encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    encoder_id: String,
    values: Vec<f64>,
}

impl Embedding {
    pub fn new(encoder_id: impl Into<String>, values: Vec<f64>) -> Result<Self, EncoderError> {
        let encoder_id = encoder_id.into();
        if values.is_empty() {
            return Err(EncoderError::InvalidEmbedding(format!(
                "{encoder_id}: empty embedding"
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(EncoderError::InvalidEmbedding(format!(
                "{encoder_id}: non-finite value at index {pos}"
            )));
        }
        Ok(Self { encoder_id, values })
    }

    pub fn encoder_id(&self) -> &str {
        &self.encoder_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}
