# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

import sys
from ._cli import main

sys.exit(main())
