//! Write a scenario to text, edit it, and read it back.

use intersection_supervisor::sim::scenario::ScenarioConfig;

fn main() -> intersection_supervisor::Result<()> {
    let mut cfg = ScenarioConfig::scenario1();
    cfg.seed = 99;
    let text = cfg.to_text();
    print!("{text}");

    // slow down the first vehicle's desired input
    let edited = text.replacen(",-0.05,0.05,1\n", ",-0.05,0.05,0.25\n", 1);
    let back = ScenarioConfig::parse(&edited, "edited")?;
    println!("vehicle 1 desired input: {:?}", back.vehicles[0].desired);

    match ScenarioConfig::parse("tau=0.1\nsteps=5\nseed=1\nvehicle,1,1,oops\n", "broken.txt") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
