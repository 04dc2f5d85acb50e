//! Saliency maps computed elsewhere (e.g. Grad-CAM, Grad-CAM++).

use std::collections::HashMap;

use super::Explainer;
use crate::data::{Attribution, Dataset, Instance, Shape};
use crate::error::{Error, Result};
use crate::io::NdArray;
use crate::oracle::Oracle;
use crate::rng::Stream;

/// Nearest-neighbour upscaling of a `from` grid to `to` by integer factors.
pub fn rescale_nearest(map: &[f64], from: (usize, usize), to: (usize, usize)) -> Result<Vec<f64>> {
    let (h, w) = from;
    let (big_h, big_w) = to;
    if from == to {
        return Ok(map.to_vec());
    }
    if h == 0 || w == 0 || big_h % h != 0 || big_w % w != 0 {
        return Err(Error::ShapeUnrescalable { from, to });
    }
    let (fy, fx) = (big_h / h, big_w / w);
    let mut out = Vec::with_capacity(big_h * big_w);
    for r in 0..big_h {
        for c in 0..big_w {
            out.push(map[(r / fy) * w + c / fx]);
        }
    }
    Ok(out)
}

/// Splits `array` into `count` maps laid out for `shape`.
fn maps_for(array_shape: &[usize], data: &[f64], shape: Shape) -> Result<Vec<Vec<f64>>> {
    let maps: Vec<Vec<f64>> = match (shape, array_shape) {
        (Shape::Image { height, width }, [h, w]) => data
            .chunks(h * w)
            .map(|m| rescale_nearest(m, (*h, *w), (height, width)))
            .collect::<Result<_>>()?,
        (Shape::Tabular { features }, [d]) if *d == features => data.chunks(features).map(<[f64]>::to_vec).collect(),
        _ => {
            return Err(Error::ShapeMismatch(format!(
                "saliency maps of shape {array_shape:?} do not fit instances of shape {:?}",
                shape.dims()
            )))
        }
    };
    Ok(maps)
}

fn check_finite(maps: &[Vec<f64>]) -> Result<()> {
    for (instance, m) in maps.iter().enumerate() {
        if let Some(index) = m.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { instance, index });
        }
    }
    Ok(())
}

/// One attribution per dataset instance from an `(N,H,W)` (or `(N,d)`) array.
pub fn ingest_saliency(array: &NdArray, dataset: &Dataset, method_name: &str) -> Result<Vec<Attribution>> {
    let Some((&count, rest)) = array.shape.split_first() else {
        return Err(Error::ShapeMismatch("saliency array is a scalar".into()));
    };
    if count != dataset.len() {
        return Err(Error::CountMismatch { expected: dataset.len(), got: count });
    }
    let maps = maps_for(rest, &array.data, dataset.shape)?;
    check_finite(&maps)?;
    Ok(maps.into_iter().map(|values| Attribution::new(values, 0, method_name)).collect())
}

/// Ingested maps, optionally with maps of perturbed inputs for robustness.
#[derive(Debug, Clone)]
pub struct Ingested {
    name: String,
    by_id: HashMap<usize, usize>,
    instances: Vec<Vec<f64>>,
    maps: Vec<Attribution>,
    companions: Option<Vec<Vec<Attribution>>>,
}

pub fn ingest_with_companions(
    maps: &NdArray,
    companions: Option<&NdArray>,
    dataset: &Dataset,
    name: &str,
) -> Result<Ingested> {
    let attributions = ingest_saliency(maps, dataset, name)?;
    let companions = match companions {
        None => None,
        Some(arr) => {
            let [count, per, ref rest @ ..] = arr.shape[..] else {
                return Err(Error::ShapeMismatch("perturbed maps need shape (N,P,...)".into()));
            };
            if count != dataset.len() {
                return Err(Error::CountMismatch { expected: dataset.len(), got: count });
            }
            if per == 0 {
                return Err(Error::ShapeMismatch("perturbed maps need P >= 1".into()));
            }
            let flat = maps_for(rest, &arr.data, dataset.shape)?;
            check_finite(&flat)?;
            let grouped: Vec<Vec<Attribution>> = flat
                .chunks(per)
                .map(|group| group.iter().map(|m| Attribution::new(m.clone(), 0, name)).collect())
                .collect();
            Some(grouped)
        }
    };
    Ok(Ingested {
        name: name.to_string(),
        by_id: dataset.instances.iter().enumerate().map(|(pos, i)| (i.id, pos)).collect(),
        instances: dataset.instances.iter().map(|i| i.values.clone()).collect(),
        maps: attributions,
        companions,
    })
}

impl Explainer for Ingested {
    fn name(&self) -> &str {
        &self.name
    }

    fn explain(&self, _model: &dyn Oracle, x: &Instance, class: usize, _rng: &mut Stream) -> Result<Attribution> {
        let pos = *self.by_id.get(&x.id).ok_or(Error::ExplainerNotReRunnable)?;
        if self.instances[pos] != x.values {
            return Err(Error::ExplainerNotReRunnable);
        }
        let mut a = self.maps[pos].clone();
        a.target_class = class;
        Ok(a)
    }

    fn rerunnable(&self) -> bool {
        false
    }

    fn perturbed_maps(&self, id: usize) -> Option<&[Attribution]> {
        let pos = *self.by_id.get(&id)?;
        self.companions.as_ref().map(|c| c[pos].as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn images(n: usize, side: usize) -> Dataset {
        Dataset::images(side, side, vec![vec![0.5; side * side]; n]).unwrap()
    }

    #[test]
    fn identity_shape_preserves_values() {
        let data: Vec<f64> = (0..5 * 64).map(|i| f64::from(i) * 0.01).collect();
        let arr = NdArray::new(vec![5, 8, 8], data.clone()).unwrap();
        let attrs = ingest_saliency(&arr, &images(5, 8), "gradcam").unwrap();
        assert_eq!(attrs.len(), 5);
        assert_eq!(attrs[3].values, data[3 * 64..4 * 64]);
        assert_eq!(attrs[0].method_name, "gradcam");
    }

    #[test]
    fn nearest_neighbour_blocks() {
        let data: Vec<f64> = (0..5 * 16).map(f64::from).collect();
        let arr = NdArray::new(vec![5, 4, 4], data).unwrap();
        let attrs = ingest_saliency(&arr, &images(5, 8), "gradcam").unwrap();
        let a = &attrs[1].values;
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(a[r * 8 + c], f64::from((16 + (r / 2) * 4 + c / 2) as u32));
            }
        }
    }

    #[test]
    fn count_and_scale_errors() {
        let arr = NdArray::new(vec![4, 8, 8], vec![0.0; 4 * 64]).unwrap();
        assert!(matches!(
            ingest_saliency(&arr, &images(5, 8), "m"),
            Err(Error::CountMismatch { expected: 5, got: 4 })
        ));
        let arr = NdArray::new(vec![5, 3, 3], vec![0.0; 45]).unwrap();
        assert!(matches!(ingest_saliency(&arr, &images(5, 8), "m"), Err(Error::ShapeUnrescalable { .. })));
    }

    #[test]
    fn not_rerunnable_without_companions() {
        let ds = images(2, 4);
        let arr = NdArray::new(vec![2, 4, 4], vec![1.0; 32]).unwrap();
        let ing = ingest_with_companions(&arr, None, &ds, "m").unwrap();
        assert!(!ing.rerunnable());
        assert!(ing.perturbed_maps(0).is_none());
        let comp = NdArray::new(vec![2, 3, 2, 2], vec![1.0; 24]).unwrap();
        let ing = ingest_with_companions(&arr, Some(&comp), &ds, "m").unwrap();
        assert_eq!(ing.perturbed_maps(1).unwrap().len(), 3);
        assert_eq!(ing.perturbed_maps(1).unwrap()[0].values.len(), 16);
    }
}
