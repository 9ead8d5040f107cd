fn main() {
    // populated once the cli module lands
    eprintln!("alpharen: not yet wired");
    std::process::exit(1);
}
