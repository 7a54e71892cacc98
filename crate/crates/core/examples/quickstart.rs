use std::sync::Arc;

use polylearn::{quantum_learn, quantum_query_count, FieldCtx, HiddenOracle, MultilinearPoly};

fn main() -> Result<(), polylearn::Error> {
    let ctx = Arc::new("2^2:1,1,1".parse::<FieldCtx>()?);
    let f = MultilinearPoly::random(ctx, 5, 2, 7)?;
    let oracle = HiddenOracle::new(f.clone());
    let report = quantum_learn(&oracle, 5, 2)?;
    assert!(report.learned.poly_equal(&f)?);
    assert_eq!(report.queries_used as u128, quantum_query_count(5, 2));
    println!(
        "learned {} coefficients with {} queries",
        report.learned.num_terms(),
        report.queries_used
    );
    Ok(())
}
