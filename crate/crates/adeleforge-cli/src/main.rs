fn main() {
    println!("adeleforge");
}
