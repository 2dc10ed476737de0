"""Main entry point for pipeline-doctor package."""

from pipeline_doctor.cli import app

if __name__ == "__main__":
    app()
