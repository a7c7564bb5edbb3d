//! Lower density scans and the three-shift covering test on support sets.

use hrtlab::exppoly::{beurling_lower_density_scan, support_cover_check, IntervalUnion, RealInterval};

fn main() -> hrtlab::Result<()> {
    let window = RealInterval::new(0.0, 200.0)?;
    let periodic = IntervalUnion::from_intervals((0..100).map(|j| RealInterval::with_length(2.0 * j as f64, 1.0).unwrap()));
    // gaps grow linearly: the density tends to zero
    let mut x = 0.0;
    let mut pieces = Vec::new();
    while x < 200.0 {
        pieces.push(RealInterval::with_length(x, 1.0)?);
        x += 2.0 + 0.2 * x;
    }
    let sparse = IntervalUnion::from_intervals(pieces);
    let r = [1.0, 4.0, 16.0, 64.0];
    for (name, k) in [("periodic", &periodic), ("sparse", &sparse)] {
        let scan = beurling_lower_density_scan(k, &r, &window)?;
        let dens: Vec<String> = scan.iter().map(|(r, m)| format!("{:.3}", m / r)).collect();
        println!("{name:<9} inf |K n [x, x+R]| / R for R = {r:?}: {}", dens.join(", "));
    }
    let core = RealInterval::new(50.0, 150.0)?;
    println!("periodic, shifts 1, 2: {:?}", support_cover_check(&periodic, 1.0, 2.0, Some(&core))?.as_tuple());
    println!("periodic, shifts 2, 4: {:?}", support_cover_check(&periodic, 2.0, 4.0, Some(&core))?.as_tuple());
    Ok(())
}
