from paraview.simple import *

# Disable automatic camera reset on 'Show'
paraview.simple._DisableFirstRenderCameraReset()

# Read in the file
disk_ex2 = ExodusIIReader(FileName=['disk.ex2'])
disk_ex2.PointVariables = ['V', 'Temp']

# Create a stream tracer
streamTracer = StreamTracer(Input=disk_ex2,
                            SeedType='Point Cloud')
streamTracer.Vectors = ['POINTS', 'V']
streamTracer.SeedType.NumberOfPoints = 100  # using default point cloud

# Render the streamlines with tubes
tube = Tube(Input=streamTracer)
tube.Radius = 0.05

# Add cone glyphs to the streamlines
coneGlyph = Glyph(Input=tube,
                  GlyphType='Cone')
coneGlyph.Scalars = ['POINTS', 'Temp'] # Not a valid function call
coneGlyph.Vectors = ['POINTS', 'V'] # Not a valid function call
coneGlyph.ScaleFactor = 1.0

# Coloring both the streamlines and glyphs by the Temp data array
tubeRepresentation = Show(tube, 'RenderView1') # used before creating a view
tubeRepresentation.ColorArrayName = ['POINTS', 'Temp']
tubeRepresentation.LookupTable = GetLookupTableForArray('Temp', 1)

glyphRepresentation = Show(coneGlyph, 'RenderView1')
glyphRepresentation.ColorArrayName = ['POINTS', 'Temp']
glyphRepresentation.LookupTable = GetLookupTableForArray('Temp', 1)

# Get the active view and set the view direction
renderView1 = GetActiveViewOrCreate('RenderView')
renderView1.ViewSize = [1920, 1080]
# looking from +X direction
renderView1.CameraPosition = [1, 0, 0]  # CameraPosition is not right
renderView1.CameraFocalPoint = [0, 0, 0] # CameraFocalPoint is not right
renderView1.CameraViewUp = [0, 0, 1] # CameraViewUp is not right

# Save a screenshot
SaveScreenshot('stream-glyph-screenshot.png', renderView1,
               ImageResolution=[1920, 1080]) # Creates gray background

# Render the final view
Render()
