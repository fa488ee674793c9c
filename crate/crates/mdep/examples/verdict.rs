//! The README walkthrough: exact moments and the degeneracy verdict for the
//! product factor on fair bits.

use mdep::{coboundary_decompose, exact_moments, BlockFactor, SourceDistribution};

fn main() -> mdep::Result<()> {
    let src = SourceDistribution::uniform_ints(2)?;
    let f = BlockFactor::table_for_source(2, &src, vec![0.0, 0.0, 0.0, 1.0])?;

    let mm = exact_moments(&f, &src)?;
    assert!((mm.sigma2 - 0.3125).abs() < 1e-12);

    let verdict = coboundary_decompose(&f, &src)?;
    assert!(!verdict.is_degenerate());

    println!("sigma^2 = {}, degenerate: {}", mm.sigma2, verdict.is_degenerate());
    Ok(())
}
