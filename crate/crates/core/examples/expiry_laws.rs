//! Building expiry laws: from a pmf, from per-period hazards, from a
//! constant intensity, and by discretizing continuous expiries.

use reopt::expiry::{discretize, geometric_law, law_from_hazards, GenericExpiry};
use reopt::{ContinuousExpiry, DiscretizeMode, ExpiryLaw};

fn show(name: &str, law: &ExpiryLaw) {
    let pmf: Vec<String> = law.pmf().iter().map(|p| format!("{p:.4}")).collect();
    let hz: Vec<String> = law.hazards().iter().map(|h| format!("{h:.4}")).collect();
    println!(
        "{name}\n  pmf     [{}]\n  hazards [{}]",
        pmf.join(", "),
        hz.join(", ")
    );
}

fn main() -> reopt::Result<()> {
    show("explicit pmf", &ExpiryLaw::new(vec![0.5, 0.25, 0.25])?);
    show(
        "hazards 0.1, 0.3, 0.5",
        &law_from_hazards(&[0.1, 0.3, 0.5])?,
    );
    show("geometric p = 0.2", &geometric_law(0.2, 4)?);
    show(
        "intensity 0.5, dt 0.25",
        &ExpiryLaw::from_intensity(0.5, 0.25, 4)?,
    );

    let exp = ContinuousExpiry::ExponentialWithAtom {
        lambda: 0.5,
        horizon: 1.0,
    };
    show(
        "exp-atom λ=0.5 floored, n=4",
        &discretize(&exp, 4, DiscretizeMode::Floor)?,
    );

    let point = ContinuousExpiry::PointMass {
        t: 0.37,
        horizon: 1.0,
    };
    show(
        "point mass at 0.37, n=10",
        &discretize(&point, 10, DiscretizeMode::Floor)?,
    );

    let uniform = ContinuousExpiry::Generic(GenericExpiry::new(1.0, |x| x.clamp(0.0, 1.0)));
    show(
        "uniform on (0,1), n=4, floor + 1",
        &discretize(&uniform, 4, DiscretizeMode::FloorPlusOne)?,
    );

    let json = serde_json::to_string(&ExpiryLaw::new(vec![0.5, 0.5])?).unwrap();
    println!("pmf file format: {json}");
    Ok(())
}
