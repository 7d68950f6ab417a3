#!/usr/bin/env python
"""
check_api_key.py

Script to check if an LLM provider API key is properly set up for live synth runs
"""

import os
import sys
import logging

# Configure logging
logging.basicConfig(level=logging.INFO,
                    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

KEY_VARIABLES = ["PLANFORGE_API_KEY", "OPENAI_API_KEY", "ANTHROPIC_API_KEY"]


def find_api_key():
    """Return (variable, key) for the first provider key set in the environment."""
    for name in KEY_VARIABLES:
        value = os.environ.get(name)
        if value:
            return name, value
    return None, None


def check_api_key():
    """Check if a provider API key is set in environment variables"""
    name, api_key = find_api_key()

    if not api_key:
        logger.error(f"No provider key found; set one of {', '.join(KEY_VARIABLES)}")
        return False

    logger.info(f"{name} found in environment variables")
    # Just show first few characters for security
    visible_part = api_key[:4] + "..." if len(api_key) > 4 else ""
    logger.info(f"Key starts with: {visible_part}")
    base_url = os.environ.get("PLANFORGE_BASE_URL")
    if base_url:
        logger.info(f"Using endpoint override PLANFORGE_BASE_URL={base_url}")
    return True


if __name__ == "__main__":
    logger.info("Checking for an LLM provider API key...")
    if not check_api_key():
        logger.info("Export the key before running 'synth --provider http', e.g.")
        logger.info("  export PLANFORGE_API_KEY=...")
        sys.exit(1)
    else:
        logger.info("Provider API key is properly set up")
        sys.exit(0)
