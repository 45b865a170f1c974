import logging
import os
import sys

# Local Modules
import config

# ==========================================
# LOGGING SETUP (Must be before other imports)
# ==========================================
os.makedirs(config.LOGS_DIR, exist_ok=True)

logger = logging.getLogger('Workbench')
root_logger = logging.getLogger()
root_logger.setLevel(logging.INFO)
formatter = logging.Formatter('%(asctime)s [%(levelname)s] %(name)s: %(message)s')

# Console Handler (stderr; stdout carries reports)
console_handler = logging.StreamHandler(sys.stderr)
console_handler.setFormatter(formatter)

# File Handler
file_handler = logging.FileHandler(os.path.join(config.LOGS_DIR, 'workbench.log'), encoding='utf-8')
file_handler.setFormatter(formatter)

if not root_logger.handlers:
    root_logger.addHandler(console_handler)
    root_logger.addHandler(file_handler)

# Other Local Modules (Imported AFTER logging is set up)
import cli

if __name__ == "__main__":
    try:
        sys.exit(cli.main())
    except KeyboardInterrupt:
        logger.warning("🛑 Interrupted.")
        sys.exit(130)
