//! Predict a vehicle's state interval one period ahead, then correct it with a
//! noisy measurement.

use intersection_supervisor::dynamics::{
    correct_estimate, predict_step, propagate_samples, Bounds, InputSignal, NoiseBounds, StateInterval,
    VehicleParams, VehicleState,
};

fn main() -> intersection_supervisor::Result<()> {
    let car = VehicleParams::reference(true);
    let est = StateInterval::new(VehicleState::new(-45.0, 9.95), VehicleState::new(-39.0, 10.05))?;
    let input = InputSignal::Constant(1.0);

    let pred = predict_step(&car, &est, &input, 0.1, 0.01)?;
    println!("estimate   y in [{:.3}, {:.3}]  v in [{:.3}, {:.3}]", est.lo.y, est.hi.y, est.lo.v, est.hi.v);
    println!("prediction y in [{:.3}, {:.3}]  v in [{:.3}, {:.3}]", pred.lo.y, pred.hi.y, pred.lo.v, pred.hi.v);

    let noise = NoiseBounds {
        y: Bounds::symmetric(3.0),
        v: Bounds::symmetric(0.05),
    };
    let meas = VehicleState::new(-40.2, 10.1);
    let corrected = correct_estimate(&pred, &meas, &noise)?;
    println!("corrected  y in [{:.3}, {:.3}]  v in [{:.3}, {:.3}]", corrected.lo.y, corrected.hi.y, corrected.lo.v, corrected.hi.v);

    // an uncontrolled vehicle spreads faster since its driver input is unknown
    let driver = VehicleParams::reference(false);
    let spread = propagate_samples(&driver, &est, &InputSignal::Constant(0.0), 2.0, 0.01)?;
    let last = spread.last().expect("non-empty horizon");
    println!("uncontrolled after ~2 s: position width {:.3} m", last.hi.y - last.lo.y);
    Ok(())
}
