//! Reads a trajectory from CSV and prints its per-step increments.

use netrecon::TimeSeries;

const DATA: &str = "\
t,mrna,protein
0.0,1.0,0.0
0.5,0.8,0.4
1.0,0.7,0.7
1.5,0.65,0.9
";

fn main() -> netrecon::Result<()> {
    let ts = TimeSeries::read_csv(DATA.as_bytes(), None)?;
    println!("step {} inferred from the t column", ts.step());
    println!("states {:?}", ts.names());

    let y = ts.finite_difference_targets();
    for i in 0..ts.n_states() {
        println!("{}: {:?}", ts.names()[i], y.column(i).as_slice());
    }

    // without a t column the step must be given
    let bare = TimeSeries::read_csv("a,b\n1,2\n3,4\n".as_bytes(), Some(0.25))?;
    print!("{}", bare.to_csv_string());
    Ok(())
}
