from rabires.cli import main

main()
