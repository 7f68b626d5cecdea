from quantileda.cli import main
import sys
sys.exit(main())
