fn main() {
    eprintln!("fourwave CLI: not wired up yet");
    std::process::exit(2);
}
