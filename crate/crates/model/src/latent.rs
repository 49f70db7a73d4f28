//! Latent token layout: one hand token followed by four object tokens.

use graspgen_core::{Real, Tensor};

pub const HAND_TOKENS: usize = 1;
pub const OBJECT_TOKENS: usize = 4;
pub const TOTAL_TOKENS: usize = HAND_TOKENS + OBJECT_TOKENS;
pub const DEFAULT_LATENT_WIDTH: usize = 512;

/// Clean latent for one sample: hand token `[1, C]` and object tokens
/// `[4, C]`; the assembled code is hand first.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentCode<T> {
    pub hand: Tensor<T>,
    pub object: Tensor<T>,
}

impl<T: Real> LatentCode<T> {
    pub fn new(hand: Tensor<T>, object: Tensor<T>) -> Self {
        assert_eq!(hand.rows(), HAND_TOKENS, "hand token must be 1 x C, got {:?}", hand.shape());
        assert_eq!(
            object.rows(),
            OBJECT_TOKENS,
            "object tokens must be 4 x C, got {:?}",
            object.shape()
        );
        assert_eq!(
            hand.cols(),
            object.cols(),
            "token widths differ: {:?} vs {:?}",
            hand.shape(),
            object.shape()
        );
        Self { hand, object }
    }

    pub fn width(&self) -> usize {
        self.hand.cols()
    }

    /// `[5, C]`, hand token first.
    pub fn assemble(&self) -> Tensor<T> {
        let c = self.width();
        let mut data = Vec::with_capacity(TOTAL_TOKENS * c);
        data.extend_from_slice(self.hand.data());
        data.extend_from_slice(self.object.data());
        Tensor::from_vec(TOTAL_TOKENS, c, data)
    }

    pub fn split(z: &Tensor<T>) -> Self {
        assert_eq!(z.rows(), TOTAL_TOKENS, "assembled latent must be 5 x C, got {:?}", z.shape());
        let c = z.cols();
        let hand = Tensor::from_vec(HAND_TOKENS, c, z.data()[..c].to_vec());
        let object = Tensor::from_vec(OBJECT_TOKENS, c, z.data()[c..].to_vec());
        Self { hand, object }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assemble_split_round_trip_keeps_order() {
        let hand = Tensor::from_vec(1, 3, vec![1.0f32, 2.0, 3.0]);
        let object = Tensor::from_vec(4, 3, (0..12).map(|v| v as f32 * 0.5).collect());
        let code = LatentCode::new(hand.clone(), object.clone());
        let z = code.assemble();
        assert_eq!(z.row(0), hand.row(0));
        let back = LatentCode::split(&z);
        assert_eq!(back.hand, hand);
        assert_eq!(back.object, object);
    }
}
