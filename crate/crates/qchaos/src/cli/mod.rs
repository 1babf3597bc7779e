//! Command-line front end (placeholder while the numerics settle).

pub fn dispatch<I, S>(_args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    2
}
