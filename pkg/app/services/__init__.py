"""Services for boundary maps, extensions, vector fields and the Teichmüller metric"""
