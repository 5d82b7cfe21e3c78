from hybridsim.cli import main

main()
