//! Headerless CSV round trip for univariate and bivariate samples.

use semimix::data::{read_csv, write_csv};
use semimix::families::ParametricFamily;

fn main() -> semimix::Result<()> {
    let fam = ParametricFamily::bivariate_tied_mean(-1.0, 1.0, 0.0, (-5.0, 5.0));
    let sample = fam.sample(&[0.5], 4, 9)?;
    let mut buf = Vec::new();
    write_csv(&sample, &mut buf)?;
    let text = String::from_utf8(buf).unwrap();
    print!("{text}");
    let back = read_csv(text.as_bytes())?;
    println!("round trip exact: {}", back == sample);

    match read_csv("1.0\n2.0\nnot-a-number\n".as_bytes()) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("error: {e}"),
    }
    Ok(())
}
