"""Parameter models and state value types."""
