fn main() {
    println!("smf");
}
