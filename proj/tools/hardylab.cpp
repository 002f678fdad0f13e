// Placeholder main; the CLI is assembled once the config/report layers land.
int main() { return 0; }
