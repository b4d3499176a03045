# Report surface
