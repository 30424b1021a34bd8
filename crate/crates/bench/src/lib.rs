//! Fixtures shared by the benchmarks.

use obddproof::{
    builtin_schedule, gen_php, CnfFormula, RunLimits, Schedule, ScheduleKind, VarOrder,
};

/// `PHP_n` under row-major order with a prebuilt schedule of `kind`.
pub fn php_fixture(n: usize, kind: ScheduleKind) -> (CnfFormula, VarOrder, Schedule) {
    let (php, _) = gen_php(n).expect("n >= 1");
    let order = VarOrder::row_major(php.n_vars());
    let schedule = builtin_schedule(
        &php,
        &order,
        kind,
        kind.needs_projection(),
        RunLimits::default(),
    )
    .expect("builtin schedule");
    (php, order, schedule)
}
