# Domain layer: calculi and connections
