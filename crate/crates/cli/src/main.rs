fn main() {
    std::process::exit(bouss_cli::run(std::env::args_os()));
}
