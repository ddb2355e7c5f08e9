fn main() {
    std::process::exit(radinv::run());
}
