use rand::Rng;

use super::Explainer;
use crate::data::{Attribution, Instance};
use crate::error::Result;
use crate::oracle::Oracle;
use crate::rng::Stream;

#[derive(Debug, Clone)]
pub struct RandomAttribution {
    pub name: String,
}

impl Explainer for RandomAttribution {
    fn name(&self) -> &str {
        &self.name
    }

    fn explain(&self, _model: &dyn Oracle, x: &Instance, class: usize, rng: &mut Stream) -> Result<Attribution> {
        let values = (0..x.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Ok(Attribution::new(values, class, &self.name))
    }
}
